"""Disordered renewal pinning model.

The partition function pinned at ``N`` obeys the renewal recursion::

    Z_0 = 1,   Z_n = exp(h + beta * omega_n) * sum_{j<n} Z_j K(n - j)

with the pure power-law inter-arrival law ``K(n) = c_alpha n^-(1+alpha)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache, partial

import numpy as np
from scipy import integrate
from scipy.special import zeta

from . import disorder as dis
from .errors import BracketNotFound, EmptyDisorder
from .numerics import bisect_predicate
from .replicas import blocks, derive_seed, map_ordered

# rescale a replica row once its newest entry exceeds this factor
_RESCALE_AT = 1e64
# terms summed explicitly by the homogeneous solver before the integral tail
_HOMOG_TERMS = 10_000


@dataclass(frozen=True)
class RenewalLaw:
    """Inter-arrival law ``K(n) = (1 - defect) c_alpha n^-(1+alpha)``, ``n >= 1``.

    ``c_alpha = 1/zeta(1 + alpha)`` normalizes the recurrent case; a positive
    ``defect`` is the probability of never returning.
    """

    alpha: float
    defect: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0.0 <= self.defect < 1.0:
            raise ValueError("defect must lie in [0, 1)")

    @property
    def c_alpha(self) -> float:
        return 1.0 / float(zeta(1.0 + self.alpha, 1))

    @property
    def gamma(self) -> float:
        """Exponent of the single-jump lower bound Z_N >= K(N) e^{h + beta omega_N}."""
        return 1.0 + self.alpha

    @property
    def h_c0(self) -> float:
        """Homogeneous critical point -log(1 - defect)."""
        return -math.log1p(-self.defect)

    def K(self, n):
        n = np.asarray(n, dtype=float)
        return (1.0 - self.defect) * self.c_alpha * n ** -(1.0 + self.alpha)

    def log_K(self, n):
        n = np.asarray(n, dtype=float)
        return math.log1p(-self.defect) + math.log(self.c_alpha) - (1.0 + self.alpha) * np.log(n)

    def kernel(self, N: int) -> np.ndarray:
        """Array ``[0, K(1), ..., K(N)]`` (read-only)."""
        return _kernel(self.alpha, self.defect, int(N))


@lru_cache(maxsize=32)
def _kernel(alpha: float, defect: float, N: int) -> np.ndarray:
    law = RenewalLaw(alpha, defect)
    k = np.zeros(N + 1)
    k[1:] = law.K(np.arange(1, N + 1))
    k.setflags(write=False)
    return k


# ---------------------------------------------------------------------------
# Partition function
# ---------------------------------------------------------------------------


def log_z_profile(renewal: RenewalLaw, omegas: np.ndarray, beta: float, h: float) -> np.ndarray:
    """``log Z_n`` for ``n = 0..N`` and every row of ``omegas`` (shape ``(R, N)``).

    Each row of the working array is kept scaled by its running maximum and
    the removed log factor is tracked separately, so nothing over- or
    underflows for N up to 2^16 and ``|h| + beta |omega| <= 50``.
    """
    omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
    R, N = omegas.shape
    if N == 0:
        raise EmptyDisorder("empty disorder sequence")
    K = renewal.kernel(N)
    krev = K[N:0:-1].copy()  # K(N), ..., K(1)
    w = h + beta * omegas
    z = np.zeros((R, N + 1))
    z[:, 0] = 1.0
    offset = np.zeros(R)
    out = np.zeros((R, N + 1))
    for n in range(1, N + 1):
        s = z[:, :n] @ krev[N - n:]
        zn = s * np.exp(w[:, n - 1])
        out[:, n] = np.log(zn) + offset
        big = zn > _RESCALE_AT
        if big.any():
            scale = np.where(big, zn, 1.0)
            z[:, :n] /= scale[:, None]
            offset += np.log(scale)
            zn = zn / scale
        z[:, n] = zn
    return out


def quenched_log_Z(renewal: RenewalLaw, omega, beta: float, h: float) -> float:
    """log Z_N for one disorder sequence of length N."""
    omega = np.asarray(omega, dtype=float)
    if omega.size == 0:
        raise EmptyDisorder("empty disorder sequence")
    return float(log_z_profile(renewal, omega[None, :], beta, h)[0, -1])


def superadditivity_slack(renewal: RenewalLaw, omega, beta: float, h: float, N: int) -> float:
    """``log Z_{N+M}(omega) - log Z_N(omega) - log Z_M(theta^N omega)``."""
    omega = np.asarray(omega, dtype=float)
    if not 1 <= N < omega.size:
        raise ValueError("need 1 <= N < len(omega)")
    total = quenched_log_Z(renewal, omega, beta, h)
    first = quenched_log_Z(renewal, omega[:N], beta, h)
    second = quenched_log_Z(renewal, omega[N:], beta, h)
    return total - first - second


def superadditivity_check(renewal: RenewalLaw, omega, beta: float, h: float, N: int) -> bool:
    return superadditivity_slack(renewal, omega, beta, h, N) >= -1e-9


# ---------------------------------------------------------------------------
# Monte Carlo free energy
# ---------------------------------------------------------------------------


@dataclass
class FreeEnergyEstimate:
    value: float
    std_error: float
    systematic: float
    N: int
    replicas: int
    seed: int
    beta: float = 0.0
    h: float = 0.0
    delta: float = 0.0

    @property
    def error(self) -> float:
        """Combined allowance ``3 std_error + systematic``."""
        return 3.0 * self.std_error + self.systematic

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_mc_args(N: int, replicas: int) -> None:
    if N < 2 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 2 (got {N})")
    if replicas < 2:
        raise ValueError("need at least two replicas")


def draw_disorder(spec: dis.DisorderSpec, delta: float, N: int, replicas: int, seed: int) -> np.ndarray:
    """Replica disorder blocks, row ``r`` drawn with seed ``derive_seed(seed, r)``."""
    return np.stack([dis.sample_block(spec, delta, N, derive_seed(seed, r))[0] for r in range(replicas)])


def replica_log_z(
    renewal: RenewalLaw, omegas: np.ndarray, beta: float, h: float, workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """(log Z_{N/2}, log Z_N) per replica, computed in fixed index blocks."""
    N = omegas.shape[1]

    def run(block):
        prof = log_z_profile(renewal, omegas[block.start:block.stop], beta, h)
        return prof[:, N // 2], prof[:, N]

    parts = map_ordered(run, blocks(omegas.shape[0]), workers)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def estimate_from_log_z(log_half, log_full, N, seed, beta, h, delta) -> FreeEnergyEstimate:
    per = log_full / N
    half = log_half / (N // 2)
    R = per.size
    return FreeEnergyEstimate(
        value=float(per.mean()),
        std_error=float(per.std(ddof=1) / math.sqrt(R)),
        systematic=float(abs(per.mean() - half.mean())),
        N=int(N),
        replicas=int(R),
        seed=int(seed),
        beta=float(beta),
        h=float(h),
        delta=float(delta),
    )


def free_energy_mc(
    spec: dis.DisorderSpec,
    renewal: RenewalLaw,
    beta: float,
    h: float,
    delta: float,
    N: int,
    replicas: int,
    seed: int,
    workers: int = 1,
    raw: list | None = None,
) -> FreeEnergyEstimate:
    """Quenched free energy per monomer, averaged over replicas drawn from P_delta.

    ``systematic`` is ``|f_N - f_{N/2}|`` evaluated on the same replicas.
    If ``raw`` is a list, per-replica rows
    ``(replica_index, seed, log_Z_N, log_Z_half_N)`` are appended to it.
    """
    _check_mc_args(N, replicas)
    omegas = draw_disorder(spec, delta, N, replicas, seed)
    log_half, log_full = replica_log_z(renewal, omegas, beta, h, workers)
    if raw is not None:
        for r in range(replicas):
            raw.append((r, derive_seed(seed, r), float(log_full[r]), float(log_half[r])))
    return estimate_from_log_z(log_half, log_full, N, seed, beta, h, delta)


def replica_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["replica_index", "seed", "log_Z_N", "log_Z_half_N"])
    for r in rows:
        writer.writerow([r[0], r[1], repr(r[2]), repr(r[3])])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Homogeneous model and critical point
# ---------------------------------------------------------------------------


def _scaled_tail(s: float, u0: float) -> float:
    """``int_{u0}^inf u^-s (1 - e^-u) du`` for ``s > 1``, split where the integrand changes shape."""
    quad = partial(integrate.quad, epsabs=0.0, epsrel=1e-11, limit=200)
    total = 0.0
    if u0 < 1.0:
        # log substitution u = e^v keeps the decades near 0 well resolved
        total += quad(lambda v: math.exp((1.0 - s) * v) * -math.expm1(-math.exp(v)), math.log(u0), 0.0)[0]
        u0 = 1.0
    # int u^-s du in closed form minus e^{-u0} int_0^inf (u0 + v)^-s e^-v dv
    decay = math.exp(-u0) * quad(lambda v: (u0 + v) ** -s * math.exp(-v), 0.0, np.inf)[0] if u0 < 745.0 else 0.0
    return total + u0 ** (1.0 - s) / (s - 1.0) - decay


def _deficit(renewal: RenewalLaw, f: float) -> float:
    """1 - sum_n K(n) e^{-f n} for the normalized (defect-free) kernel, without cancellation."""
    s = 1.0 + renewal.alpha
    n = np.arange(1, _HOMOG_TERMS + 1, dtype=float)
    head = float(np.sum(n**-s * -np.expm1(-f * n)))

    def phi(x):
        return x**-s * -math.expm1(-f * x)

    # sum over n > N0 by Euler-Maclaurin: integral - phi(N0)/2 - phi'(N0)/12
    n0 = float(_HOMOG_TERMS)
    tail_int = f ** (s - 1.0) * _scaled_tail(s, f * n0)
    dphi = -s * n0 ** (-s - 1) * -math.expm1(-f * n0) + n0**-s * f * math.exp(-f * n0)
    tail = tail_int - 0.5 * phi(n0) - dphi / 12.0
    return renewal.c_alpha * (head + tail)


def homogeneous_f(renewal: RenewalLaw, h: float) -> float:
    """Free energy of the pure model: the root ``f`` of ``sum K(n) e^{-f n} = e^{-h}``, or 0."""
    x = h - renewal.h_c0
    if x <= 0:
        return 0.0
    target = -math.expm1(-x)
    lo, hi = 0.0, x  # sum K e^{-fn} <= (1-defect) e^{-f} forces f <= x
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-12 * mid:
            break
        if _deficit(renewal, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_point(
    spec: dis.DisorderSpec,
    renewal: RenewalLaw,
    beta: float,
    delta: float,
    N: int,
    replicas: int,
    seed: int,
    tol: float = 1e-3,
    workers: int = 1,
    step: float = 0.05,
) -> float:
    """Estimate h_c by bisection on the predicate ``f_est > 3 std_error + systematic``.

    The replica disorder is drawn once and reused for every ``h``.
    """
    _check_mc_args(N, replicas)
    omegas = draw_disorder(spec, delta, N, replicas, seed)

    def localized(h: float) -> bool:
        est = estimate_from_log_z(*replica_log_z(renewal, omegas, beta, h, workers), N, seed, beta, h, delta)
        return est.value > est.error

    if localized(0.0):
        hi, lo = 0.0, -step
        while localized(lo):
            hi, lo = lo, 2.0 * lo
            if lo < -10.0:
                raise BracketNotFound("free energy positive for every h >= -10")
    else:
        lo, hi = 0.0, step
        while not localized(hi):
            lo, hi = hi, 2.0 * hi
            if hi > 10.0:
                raise BracketNotFound("no localization for h <= 10")
    return bisect_predicate(localized, lo, hi, tol)
