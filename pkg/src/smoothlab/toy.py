"""Exactly solvable product-spin models.

The spins ``sigma_1, ..., sigma_N`` are i.i.d. with finitely many atoms and
the partition function is

    Z_N = E_sigma[ exp(sum_n (h + beta omega_n) sigma_n) ],

so ``log Z_N`` factorizes over sites and the quenched free energy is the one
site average ``E_delta[log E_sigma exp((h + beta omega) sigma)]``.  Restricted
partition functions (empirical spin mean confined to a window) do not
factorize; they are computed by exact enumeration over disorder multisets and
spin count vectors.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, logsumexp

from . import disorder as dis
from .errors import EnumerationTooLarge, ParameterOutOfRange

MAX_N = 14
MAX_STATES = 10**7
FD_STEP = 1e-6
_WINDOW_SLACK = 1e-12


@dataclass(frozen=True)
class ProductSpinSpec:
    """Single-site spin law with atoms ``values[i]`` of mass ``probs[i]``."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if x.ndim != 1 or x.shape != p.shape or x.size == 0:
            raise ValueError("values and probs must be non-empty 1-d sequences of equal length")
        if np.any(p <= 0):
            raise ValueError("spin probabilities must be positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"spin probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "values", tuple(float(v) for v in x))
        object.__setattr__(self, "probs", tuple(float(v) for v in p))

    @property
    def signed(self) -> bool:
        return min(self.values) < 0

    @property
    def s0(self) -> float:
        """Uniform bound ``max |sigma|`` (the ``[0, s0]`` bound for unsigned spins)."""
        return max(abs(v) for v in self.values)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))

    def shift(self, c: float) -> "ProductSpinSpec":
        return ProductSpinSpec(tuple(v + c for v in self.values), self.probs)

    def to_dict(self) -> dict:
        return {"atoms": [[v, p] for v, p in self.atoms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ProductSpinSpec":
        atoms = d["atoms"]
        return cls(tuple(float(v) for v, _ in atoms), tuple(float(p) for _, p in atoms))

    @classmethod
    def from_json(cls, text: str) -> "ProductSpinSpec":
        return cls.from_dict(json.loads(text))


def bernoulli_spins(p: float = 0.5) -> ProductSpinSpec:
    """Spins in ``{0, 1}`` with ``P(sigma = 1) = p``."""
    return ProductSpinSpec((0.0, 1.0), (1.0 - p, p))


def rademacher_spins() -> ProductSpinSpec:
    return ProductSpinSpec((-1.0, 1.0), (0.5, 0.5))


def _check(spec: dis.DisorderSpec, spin: ProductSpinSpec, beta: float, delta: float) -> None:
    t0 = spec.t0
    if not abs(delta) < t0:
        raise ParameterOutOfRange(f"|delta|={abs(delta)} not below t0={t0}")
    if not beta * spin.s0 + abs(delta) < t0:
        raise ParameterOutOfRange(f"beta * s0 + |delta| = {beta * spin.s0 + abs(delta)} not below t0={t0}")


def _site_log_z(spin: ProductSpinSpec, beta: float, h: float, omega: np.ndarray) -> np.ndarray:
    """``log E_sigma exp((h + beta omega) sigma)`` for an array of ``omega``."""
    s = np.asarray(spin.values)
    lp = np.log(np.asarray(spin.probs))
    field = h + beta * np.asarray(omega, dtype=float)
    return logsumexp(lp + field[..., None] * s, axis=-1)


def exact_f(spec: dis.DisorderSpec, spin: ProductSpinSpec, beta: float, h: float, delta: float) -> float:
    """Quenched free energy ``E_delta[log E_sigma exp((h + beta omega) sigma)]``."""
    _check(spec, spin, beta, delta)
    return dis.expectation(spec, delta, lambda x: _site_log_z(spin, beta, h, x))


def gibbs_mean(spec: dis.DisorderSpec, spin: ProductSpinSpec, beta: float, h: float, delta: float) -> float:
    """``E_delta`` of the one-site Gibbs mean of sigma, i.e. the h-derivative of :func:`exact_f`."""
    _check(spec, spin, beta, delta)
    s = np.asarray(spin.values)
    lp = np.log(np.asarray(spin.probs))

    def mean_sigma(x):
        logits = lp + (h + beta * np.asarray(x, dtype=float))[..., None] * s
        w = np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))
        return w @ s

    return dis.expectation(spec, delta, mean_sigma)


# ---------------------------------------------------------------------------
# Finite-N enumeration
# ---------------------------------------------------------------------------


def _n_multisets(kinds: int, N: int) -> int:
    return math.comb(N + kinds - 1, kinds - 1)


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _log_multinomial(counts: Sequence[int]) -> float:
    return float(gammaln(sum(counts) + 1) - sum(gammaln(c + 1) for c in counts))


def _discrete_atoms(spec: dis.DisorderSpec, delta: float) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(spec, dis.FiniteDiscrete):
        raise ParameterOutOfRange("finite-N enumeration needs a FiniteDiscrete disorder law")
    law = spec.tilt(delta)
    return np.asarray(law.values), np.asarray(law.probs)


def enumeration_states(spec: dis.DisorderSpec, spin: ProductSpinSpec, N: int) -> int:
    """Disorder multisets times spin count vectors visited by the enumeration."""
    d = len(spec.values) if isinstance(spec, dis.FiniteDiscrete) else 0
    return _n_multisets(d, N) * _n_multisets(len(spin.values), N)


def _check_enumeration(spec: dis.DisorderSpec, spin: ProductSpinSpec, N: int) -> None:
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > MAX_N:
        raise EnumerationTooLarge(f"N={N} exceeds the enumeration cap {MAX_N}")
    states = enumeration_states(spec, spin, N)
    if states > MAX_STATES:
        raise EnumerationTooLarge(f"{states} enumeration states exceed {MAX_STATES}")


def _spin_count_log_weights(
    spin: ProductSpinSpec, beta: float, h: float, omega_values: np.ndarray, disorder_counts: Sequence[int]
) -> dict[tuple, float]:
    """log of the summed Boltzmann weight per total spin count vector, for fixed disorder counts."""
    s = np.asarray(spin.values)
    lp = np.log(np.asarray(spin.probs))
    m = s.size
    table: dict[tuple, float] = {(0,) * m: 0.0}
    for v, c in zip(omega_values, disorder_counts):
        if c == 0:
            continue
        site = lp + (h + beta * v) * s
        group = {r: _log_multinomial(r) + float(np.dot(r, site)) for r in _compositions(c, m)}
        new: dict[tuple, list] = {}
        for k, lw in table.items():
            for r, lg in group.items():
                new.setdefault(tuple(a + b for a, b in zip(k, r)), []).append(lw + lg)
        table = {k: float(logsumexp(v)) for k, v in new.items()}
    return table


def _enumerated_mean_log_z(
    spec: dis.DisorderSpec,
    spin: ProductSpinSpec,
    beta: float,
    h: float,
    delta: float,
    N: int,
    window: tuple[float, float] | None,
) -> float:
    _check(spec, spin, beta, delta)
    _check_enumeration(spec, spin, N)
    values, probs = _discrete_atoms(spec, delta)
    logq = np.log(probs)
    s = np.asarray(spin.values)
    total = 0.0
    for counts in _compositions(N, values.size):
        log_prob = _log_multinomial(counts) + float(np.dot(counts, logq))
        table = _spin_count_log_weights(spin, beta, h, values, counts)
        if window is None:
            logs = list(table.values())
        else:
            a, b = window
            logs = [lw for k, lw in table.items() if a - _WINDOW_SLACK <= np.dot(k, s) / N <= b + _WINDOW_SLACK]
        if not logs:
            return -math.inf
        total += math.exp(log_prob) * float(logsumexp(logs))
    return total / N


def exact_f_finite_N(
    spec: dis.DisorderSpec, spin: ProductSpinSpec, beta: float, h: float, delta: float, N: int
) -> float:
    """``(1/N) E_delta[log Z_N]`` by exact enumeration (equal to :func:`exact_f` for every N)."""
    return _enumerated_mean_log_z(spec, spin, beta, h, delta, N, None)


def restricted_f_finite_N(
    spec: dis.DisorderSpec,
    spin: ProductSpinSpec,
    beta: float,
    h: float,
    delta: float,
    a: float,
    b: float,
    N: int,
) -> float:
    """``(1/N) E_delta[log Z_N^{[a,b]}]``: only spin configurations with mean in ``[a, b]`` count.

    Returns ``-inf`` when no configuration satisfies the constraint.
    """
    if not a < b:
        raise ValueError("need a < b")
    return _enumerated_mean_log_z(spec, spin, beta, h, delta, N, (a, b))


def brute_force_mean_log_z(
    spec: dis.DisorderSpec,
    spin: ProductSpinSpec,
    beta: float,
    h: float,
    delta: float,
    N: int,
    window: tuple[float, float] | None = None,
) -> float:
    """Plain loop over all disorder and spin configurations (test oracle, tiny N only)."""
    values, probs = _discrete_atoms(spec, delta)
    s = np.asarray(spin.values)
    p = np.asarray(spin.probs)
    total = 0.0
    for w_idx in itertools.product(range(values.size), repeat=N):
        pw = float(np.prod(probs[list(w_idx)]))
        omega = values[list(w_idx)]
        z = 0.0
        for s_idx in itertools.product(range(s.size), repeat=N):
            sig = s[list(s_idx)]
            if window is not None and not (window[0] - _WINDOW_SLACK <= sig.mean() <= window[1] + _WINDOW_SLACK):
                continue
            z += float(np.prod(p[list(s_idx)])) * math.exp(float(np.dot(h + beta * omega, sig)))
        if z == 0.0:
            return -math.inf
        total += pw * math.log(z)
    return total / N


def window_grid(spin: ProductSpinSpec, grid: int) -> np.ndarray:
    """Window centres: multiples of ``s0/grid`` covering the range of the spins."""
    step = spin.s0 / grid
    lo = math.floor(min(spin.values) / step)
    hi = math.ceil(max(spin.values) / step)
    return np.arange(lo, hi + 1) * step


def sup_decomposition_check(
    spec: dis.DisorderSpec,
    spin: ProductSpinSpec,
    beta: float,
    h: float,
    delta: float,
    N: int,
    grid: int,
) -> float:
    """``|f_N - max_x f_N^{[x - 1/grid, x + 1/grid]}|`` over the window grid."""
    if N > 12:
        raise EnumerationTooLarge("sup decomposition is limited to N <= 12")
    full = exact_f_finite_N(spec, spin, beta, h, delta, N)
    best = max(
        restricted_f_finite_N(spec, spin, beta, h, delta, x - 1.0 / grid, x + 1.0 / grid, N)
        for x in window_grid(spin, grid)
    )
    return abs(full - best)


def bernoulli_rate(x: float) -> float:
    """``I(x) = log 2 + x log x + (1 - x) log(1 - x)`` for fair {0, 1} spins."""
    if not 0.0 <= x <= 1.0:
        return math.inf
    ent = sum(v * math.log(v) for v in (x, 1.0 - x) if v > 0)
    return math.log(2.0) + ent


def bernoulli_legendre(h: float) -> float:
    """``sup_x [h x - I(x)]`` by bounded scalar maximization."""
    res = minimize_scalar(lambda x: bernoulli_rate(x) - h * x, bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": 1e-12})
    edges = max(h * x - bernoulli_rate(x) for x in (0.0, 1.0))
    return max(-float(res.fun), edges)


# ---------------------------------------------------------------------------
# Signed counterexample
# ---------------------------------------------------------------------------


def counterexample_f(a: float, beta: float, h: float, delta: float, version: str = "log") -> float:
    """Free energy of two-point disorder with Rademacher spins.

    ``version="log"`` is ``E_delta[log cosh(h + beta omega)]``; ``version="cosh"``
    drops the logarithm, ``E_delta[cosh(h + beta omega)]``.
    """
    spec = dis.two_point(a)
    if version == "log":
        return exact_f(spec, rademacher_spins(), beta, h, delta)
    if version == "cosh":
        return dis.expectation(spec, delta, lambda x: np.cosh(h + beta * x))
    raise ValueError(f"unknown version {version!r}")


def counterexample_derivatives(a: float, beta: float, version: str = "log") -> tuple[float, float]:
    """Centered differences ``(d/dh, d/ddelta)`` of :func:`counterexample_f` at ``h = delta = 0``."""
    e = FD_STEP

    def f(h, d):
        return counterexample_f(a, beta, h, d, version)

    dh = (f(e, 0.0) - f(-e, 0.0)) / (2 * e)
    ddelta = (f(0.0, e) - f(0.0, -e)) / (2 * e)
    return dh, ddelta


DERIVATIVE_CSV_HEADER = ["a", "beta", "dh", "ddelta", "ratio"]


def derivative_table(a: float, betas: Sequence[float], version: str = "log") -> list[tuple]:
    """Rows ``(a, beta, dh, ddelta, ddelta / (beta dh))``; the ratio is nan when ``dh = 0``."""
    rows = []
    for beta in betas:
        dh, dd = counterexample_derivatives(a, beta, version)
        ratio = dd / (beta * dh) if dh != 0 else math.nan
        rows.append((float(a), float(beta), dh, dd, ratio))
    return rows


def derivative_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(DERIVATIVE_CSV_HEADER)
    for r in rows:
        writer.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def translation_identity_check(
    spec: dis.DisorderSpec, spin: ProductSpinSpec, beta: float, h: float, delta: float, c: float
) -> float:
    """``|f(spin + c) - f(spin) - (beta m_delta + h) c|``; shifting every spin by ``c`` is exact."""
    shifted = spin.shift(c)
    _check(spec, shifted, beta, delta)
    m = spec.mean_at(delta)
    return abs(exact_f(spec, shifted, beta, h, delta) - exact_f(spec, spin, beta, h, delta) - (beta * m + h) * c)
