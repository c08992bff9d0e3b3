"""Explicit constants of the smoothing inequalities.

All functions take an untilted :class:`~smoothlab.disorder.DisorderSpec`, the
disorder strength ``beta``, the tilt ``delta`` and the spin bound ``s0``.

* ``b_delta``        -- ``B_delta = (2/delta) |m_delta - log M(delta)/delta|``
* ``c_pm``           -- pointwise comparison constants ``c^-, c^+``
* ``C_pm``           -- their running averages ``(1/delta) int_0^delta c^+- ``
* ``F_beta``         -- ``delta -> C^-_{beta,delta} delta`` and its inverse
* ``a_constant``     -- ``A_{beta,delta} = B_{F^-1(delta)} (F^-1(delta)/delta)^2``
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import disorder as dis
from .errors import OutOfImage, ParameterOutOfRange
from .numerics import adaptive_simpson, bisect_increasing

# Bracket cap for F_beta inversion when eps0 is infinite.
DELTA_CAP = 64.0
QUAD_RTOL = 1e-8
ROOT_XTOL = 1e-10


def g_func(x):
    """(e^x - 1)/x, continuously extended by g(0) = 1.  Accepts arrays."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.expm1(x) / x
    series = 1.0 + x / 2.0 + x * x / 6.0 + x**3 / 24.0
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def eps0(spec: dis.DisorderSpec, s0: float) -> float:
    t0 = spec.t0
    return min(t0 / 2.0, t0 / (2.0 * s0))


def check_admissible(spec: dis.DisorderSpec, beta: float, delta: float, s0: float) -> None:
    e0 = eps0(spec, s0)
    if not (0.0 <= beta < e0):
        raise ParameterOutOfRange(f"beta={beta} outside [0, eps0={e0})")
    if not abs(delta) < e0:
        raise ParameterOutOfRange(f"|delta|={abs(delta)} not below eps0={e0}")


# below this |delta| the direct formula for B cancels badly
_B_SERIES_BELOW = 1e-3
_B_NODES, _B_WEIGHTS = np.polynomial.legendre.leggauss(8)


def b_delta(spec: dis.DisorderSpec, delta: float) -> float:
    """``B_delta = (2/delta) |m_delta - log M(delta)/delta|``, with ``B_0 = 1``.

    For small ``|delta|`` the equivalent form ``2 int_0^1 s Var_{s delta} ds``
    is used (8-point Gauss-Legendre).
    """
    if delta == 0.0:
        return 1.0
    if abs(delta) < _B_SERIES_BELOW:
        spec.check_t(delta)
        s = 0.5 * (_B_NODES + 1.0)
        var = [spec.tilt(u * delta).expect(lambda x, m=spec.mean_at(u * delta): (x - m) ** 2) for u in s]
        return float(np.sum(0.5 * _B_WEIGHTS * s * np.array(var)) * 2.0)
    m = spec.mean_at(delta)
    lm = spec.log_mgf(delta)
    return 2.0 / abs(delta) * abs(m - lm / delta)


def c_pm(spec: dis.DisorderSpec, beta: float, delta: float, s0: float = 1.0) -> tuple[float, float]:
    """Return ``(c_minus, c_plus)`` at ``(beta, delta)``.

    With ``X = omega - m_delta`` under the tilted law::

        c+ = E[X^2 g(beta s0 X+)] / E[exp(-beta s0 X-)]
        c- = E[X^2 g(-beta s0 X-)] / E[exp(beta s0 X+)]
    """
    check_admissible(spec, beta, delta, s0)
    law = spec.tilt(delta)
    m = spec.mean_at(delta)
    k = beta * s0
    bp = (m,)
    if k == 0.0:
        var = law.expect(lambda x: (x - m) ** 2, bp)
        return var, var

    def pos(x):
        return np.maximum(x - m, 0.0)

    def neg(x):
        return np.maximum(m - x, 0.0)

    num_plus = law.expect(lambda x: (x - m) ** 2 * g_func(k * pos(x)), bp)
    den_plus = law.expect(lambda x: np.exp(-k * neg(x)), bp)
    num_minus = law.expect(lambda x: (x - m) ** 2 * g_func(-k * neg(x)), bp)
    den_minus = law.expect(lambda x: np.exp(k * pos(x)), bp)
    return num_minus / den_minus, num_plus / den_plus


def C_pm(
    spec: dis.DisorderSpec, beta: float, delta: float, s0: float = 1.0, rtol: float = QUAD_RTOL
) -> tuple[float, float]:
    """Return ``(C_minus, C_plus)``: averages of ``c^-+`` over tilts between 0 and ``delta``."""
    check_admissible(spec, beta, delta, s0)
    if delta == 0.0:
        return c_pm(spec, beta, 0.0, s0)
    integral = adaptive_simpson(lambda d: np.array(c_pm(spec, beta, d, s0)), 0.0, delta, rtol=rtol)
    return float(integral[0] / delta), float(integral[1] / delta)


def F_beta(spec: dis.DisorderSpec, beta: float, delta: float, s0: float = 1.0, rtol: float = QUAD_RTOL) -> float:
    if delta == 0.0:
        check_admissible(spec, beta, delta, s0)
        return 0.0
    return C_pm(spec, beta, delta, s0, rtol)[0] * delta


def _upper_limit(spec: dis.DisorderSpec, s0: float) -> float:
    e0 = eps0(spec, s0)
    # stay strictly inside the open interval
    return DELTA_CAP if math.isinf(e0) else e0 * (1.0 - 1e-9)


def F_beta_inverse(
    spec: dis.DisorderSpec,
    beta: float,
    y: float,
    s0: float = 1.0,
    xtol: float = ROOT_XTOL,
    rtol: float = QUAD_RTOL,
) -> float:
    """Solve ``F_beta(delta) = y`` by bisection (F_beta is strictly increasing)."""
    if y == 0.0:
        check_admissible(spec, beta, 0.0, s0)
        return 0.0
    limit = _upper_limit(spec, s0)
    sign = 1.0 if y > 0 else -1.0
    edge = sign * limit

    def F(d):
        return F_beta(spec, beta, d, s0, rtol)

    if math.isinf(eps0(spec, s0)):
        # grow the bracket by doubling up to the cap
        hi = 1.0
        while hi < limit and sign * F(sign * hi) < abs(y):
            hi = min(2.0 * hi, limit)
        edge = sign * hi
    f_edge = F(edge)
    if sign * f_edge < abs(y):
        raise OutOfImage(f"y={y} exceeds the image of F_beta on the admissible interval (|F| <= {abs(f_edge)})")
    lo, hi = (0.0, edge) if sign > 0 else (edge, 0.0)
    return bisect_increasing(F, y, lo, hi, xtol=xtol)


def usable_radius(spec: dis.DisorderSpec, beta: float, s0: float = 1.0, rtol: float = QUAD_RTOL) -> float:
    """Supremum of F_beta over (0, eps0): the admissible range of ``delta`` in ``a_constant``.

    For infinite eps0 the supremum is taken over (0, DELTA_CAP).
    """
    return F_beta(spec, beta, _upper_limit(spec, s0), s0, rtol)


def a_constant(
    spec: dis.DisorderSpec,
    beta: float,
    delta: float,
    s0: float = 1.0,
    mirror: bool = False,
    xtol: float = ROOT_XTOL,
    rtol: float = QUAD_RTOL,
) -> float:
    """``A_{beta,delta} = B_{d} (d/delta)^2`` with ``d = F_beta^{-1}(delta)``.

    Defined for ``delta >= 0``; with ``mirror=True`` a negative ``delta`` is
    handled through the reflected law ``omega -> -omega``.
    """
    if delta == 0.0:
        return 1.0
    if delta < 0:
        if not mirror:
            raise ParameterOutOfRange("a_constant is defined for delta >= 0 (pass mirror=True to reflect)")
        return a_constant(dis.reflect(spec), beta, -delta, s0, False, xtol, rtol)
    if beta <= 0:
        raise ParameterOutOfRange("a_constant requires beta > 0")
    d = F_beta_inverse(spec, beta, delta, s0, xtol, rtol)
    return b_delta(spec, d) * (d / delta) ** 2


@dataclass
class ConstantsReport:
    beta: float
    delta: float
    s0: float
    gamma: float
    B_delta: float
    c_minus: float
    c_plus: float
    C_minus: float
    C_plus: float
    F_value: float
    A_value: float | None
    eps0: float
    eps0_prime: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> list:
        return [self.beta, self.delta, self.B_delta, self.c_minus, self.c_plus,
                self.C_minus, self.C_plus, self.F_value, self.A_value]


CSV_HEADER = ["beta", "delta", "B", "c_minus", "c_plus", "C_minus", "C_plus", "F", "A"]


def constants_report(
    spec: dis.DisorderSpec, beta: float, delta: float, s0: float = 1.0, gamma: float = 1.0
) -> ConstantsReport:
    """Evaluate every constant at one parameter point.

    ``A_value`` and ``eps0_prime`` are filled only when ``beta > 0``; ``A`` is
    evaluated at ``|delta|`` (through the reflected law for negative ``delta``).
    """
    c_minus, c_plus = c_pm(spec, beta, delta, s0)
    C_minus, C_plus = C_pm(spec, beta, delta, s0)
    a_val = None
    radius = None
    if beta > 0:
        radius = usable_radius(spec, beta, s0)
        a_val = a_constant(spec, beta, delta, s0, mirror=True)
    return ConstantsReport(
        beta=beta,
        delta=delta,
        s0=s0,
        gamma=gamma,
        B_delta=b_delta(spec, delta),
        c_minus=c_minus,
        c_plus=c_plus,
        C_minus=C_minus,
        C_plus=C_plus,
        F_value=C_minus * delta,
        A_value=a_val,
        eps0=eps0(spec, s0),
        eps0_prime=radius,
    )
