"""Disorder laws with locally finite exponential moments.

A law is represented by an immutable :class:`DisorderSpec`.  Untilted laws are
normalized (mean 0, variance 1); the tilted law ``P_delta`` has density
``exp(delta * x - log M(delta))`` with respect to ``P`` and is returned by
:func:`tilt` as a spec of the same family with ``tilted=True``.

Three families are supported:

* :class:`Gaussian` -- ``N(mean, 1)``; the standard law tilts to a shift.
* :class:`FiniteDiscrete` -- finitely many atoms; covers the two-point law
  ``{-1/a, a}`` and centered Rademacher.
* :class:`ContinuousDensity` -- a user density with a declared MGF radius.

Module level functions (``mgf``, ``log_mgf_prime``, ``tilt``, ``expectation``,
``sample_block``) take the untilted spec plus a tilt ``delta``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import IntegrabilityViolation, TiltOutOfRange

__all__ = [
    "DisorderSpec",
    "Gaussian",
    "FiniteDiscrete",
    "ContinuousDensity",
    "standard_gaussian",
    "two_point",
    "rademacher",
    "uniform_density",
    "laplace_density",
    "mgf",
    "log_mgf",
    "log_mgf_prime",
    "tilt",
    "expectation",
    "sample_block",
    "reflect",
    "to_dict",
    "from_dict",
    "to_json",
    "from_json",
]

MOMENT_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _composite_gl(func: Callable[[np.ndarray], np.ndarray], edges: np.ndarray) -> float:
    """Composite 32-point Gauss-Legendre rule over consecutive ``edges``."""
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    x = (a + b) * 0.5 + half * _GL_NODES[None, :]
    vals = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return float(np.sum(half * _GL_WEIGHTS[None, :] * vals))


def _panel_edges(lo: float, hi: float, width: float, breakpoints: Sequence[float]) -> np.ndarray:
    n = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n + 1)
    extra = [b for b in breakpoints if lo < b < hi]
    if extra:
        edges = np.unique(np.concatenate([edges, np.asarray(extra, dtype=float)]))
    return edges


def _as_values(f: Callable, x: np.ndarray) -> np.ndarray:
    # f may return a scalar (e.g. ``lambda x: 1.0``)
    return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)


@dataclass(frozen=True)
class DisorderSpec:
    """Base class; concrete laws override the hooks below."""

    @property
    def t0(self) -> float:
        raise NotImplementedError

    @property
    def tilted(self) -> bool:
        raise NotImplementedError

    # -- hooks on the law itself (no tilt argument) --------------------------
    def _t_range(self) -> tuple[float, float]:
        return (-self.t0, self.t0)

    def check_t(self, t: float) -> None:
        lo, hi = self._t_range()
        if not (lo < t < hi):
            raise TiltOutOfRange(f"t={t} outside the MGF domain ({lo}, {hi})")

    def log_mgf(self, t: float) -> float:
        raise NotImplementedError

    def mean_at(self, t: float) -> float:
        """(log M)'(t)."""
        raise NotImplementedError

    def tilt(self, delta: float) -> "DisorderSpec":
        raise NotImplementedError

    def expect(self, f: Callable, breakpoints: Sequence[float] = ()) -> float:
        """E[f(omega)] under this law."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def variance(self) -> float:
        m = self.expect(lambda x: x)
        return self.expect(lambda x: (x - m) ** 2)


# ---------------------------------------------------------------------------
# Gaussian
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _gaussian_rule(mean: float, half_width: float, breakpoints: tuple) -> tuple[np.ndarray, np.ndarray]:
    edges = _panel_edges(mean - half_width, mean + half_width, 1.0, breakpoints)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    x = ((a + b) * 0.5 + half * _GL_NODES[None, :]).ravel()
    w = (half * _GL_WEIGHTS[None, :]).ravel()
    w = w * np.exp(-0.5 * (x - mean) ** 2) / math.sqrt(2.0 * math.pi)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class Gaussian(DisorderSpec):
    """Unit-variance Gaussian law ``N(mean, 1)``.

    ``Gaussian()`` is the standard law; tilting by ``delta`` yields
    ``Gaussian(mean=delta)`` exactly.
    """

    mean: float = 0.0

    @property
    def t0(self) -> float:
        return math.inf

    @property
    def tilted(self) -> bool:
        return self.mean != 0.0

    def log_mgf(self, t: float) -> float:
        self.check_t(t)
        return self.mean * t + 0.5 * t * t

    def mean_at(self, t: float) -> float:
        self.check_t(t)
        return self.mean + t

    def tilt(self, delta: float) -> "Gaussian":
        self.check_t(delta)
        if delta == 0.0:
            return self
        return Gaussian(mean=self.mean + delta)

    def expect(self, f: Callable, breakpoints: Sequence[float] = ()) -> float:
        # Unit panels on [mean - L, mean + L]; L is doubled while the
        # integrand is not negligible at the truncation points.
        bps = tuple(sorted(float(b) for b in breakpoints))
        half_width = 16.0
        while True:
            x, w = _gaussian_rule(self.mean, half_width, bps)
            vals = _as_values(f, x)
            total = float(np.dot(w, vals))
            ends = np.array([self.mean - half_width, self.mean + half_width])
            tail = np.abs(_as_values(f, ends)) * np.exp(-0.5 * half_width**2) / math.sqrt(2 * math.pi)
            scale = float(np.dot(w, np.abs(vals)))
            if not np.all(np.isfinite(vals)):
                raise IntegrabilityViolation("integrand is not finite on the quadrature nodes")
            if tail.max() * half_width <= 1e-14 * max(scale, 1e-300):
                return total
            half_width *= 2.0
            if half_width > 256.0:
                raise IntegrabilityViolation("Gaussian expectation: integrand tail does not decay")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.mean + rng.standard_normal(n)

    def to_dict(self) -> dict:
        if self.mean == 0.0:
            return {"kind": "StandardGaussian", "params": {}}
        return {"kind": "Gaussian", "params": {"mean": self.mean}}


def standard_gaussian() -> Gaussian:
    return Gaussian()


# ---------------------------------------------------------------------------
# Finite discrete laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteDiscrete(DisorderSpec):
    """Law with finitely many atoms ``values[i]`` of mass ``probs[i]``.

    ``label`` and ``a`` only affect serialization: a ``TwoPoint`` law is
    written as ``{"kind": "TwoPoint", "params": {"a": a}}``.
    """

    values: tuple
    probs: tuple
    is_tilted: bool = False
    label: str = "FiniteDiscrete"
    a: float | None = None
    _x: np.ndarray = field(init=False, repr=False, compare=False)
    _logp: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if x.ndim != 1 or x.shape != p.shape or x.size == 0:
            raise ValueError("values and probs must be non-empty 1-d sequences of equal length")
        if np.any(p <= 0):
            raise ValueError("atom probabilities must be positive")
        if abs(p.sum() - 1.0) > MOMENT_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        if not self.is_tilted:
            mean = float(np.dot(p, x))
            var = float(np.dot(p, (x - mean) ** 2))
            if abs(mean) > MOMENT_TOL or abs(var - 1.0) > MOMENT_TOL:
                raise ValueError(
                    f"disorder must have mean 0 and variance 1 (got {mean:.3g}, {var:.15g}); "
                    "use FiniteDiscrete.standardized"
                )
        x.setflags(write=False)
        object.__setattr__(self, "values", tuple(float(v) for v in x))
        object.__setattr__(self, "probs", tuple(float(v) for v in p))
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_logp", np.log(p))

    @classmethod
    def standardized(cls, values: Sequence[float], probs: Sequence[float]) -> "FiniteDiscrete":
        """Center and rescale arbitrary atoms to mean 0, variance 1."""
        x = np.asarray(values, dtype=float)
        p = np.asarray(probs, dtype=float)
        p = p / p.sum()
        mean = np.dot(p, x)
        sd = math.sqrt(np.dot(p, (x - mean) ** 2))
        if sd == 0:
            raise ValueError("degenerate law cannot be standardized")
        return cls(tuple((x - mean) / sd), tuple(p))

    @property
    def t0(self) -> float:
        return math.inf

    @property
    def tilted(self) -> bool:
        return self.is_tilted

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))

    def log_mgf(self, t: float) -> float:
        self.check_t(t)
        if t == 0.0:
            return 0.0
        return float(logsumexp(t * self._x + self._logp))

    def tilted_probs(self, t: float) -> np.ndarray:
        z = t * self._x + self._logp
        return np.exp(z - logsumexp(z))

    def mean_at(self, t: float) -> float:
        self.check_t(t)
        return float(np.dot(self.tilted_probs(t), self._x))

    def tilt(self, delta: float) -> "FiniteDiscrete":
        self.check_t(delta)
        if delta == 0.0:
            return self
        q = self.tilted_probs(delta)
        q = q / q.sum()
        return FiniteDiscrete(tuple(self._x), tuple(q), is_tilted=True)

    def expect(self, f: Callable, breakpoints: Sequence[float] = ()) -> float:
        vals = _as_values(f, self._x)
        return float(np.dot(np.exp(self._logp), vals))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.choice(self._x.size, size=n, p=np.exp(self._logp))
        return self._x[idx]

    def to_dict(self) -> dict:
        if self.label == "TwoPoint" and not self.is_tilted:
            return {"kind": "TwoPoint", "params": {"a": self.a}}
        d = {"kind": "FiniteDiscrete", "params": {"atoms": [[v, p] for v, p in self.atoms]}}
        if self.is_tilted:
            d["params"]["tilted"] = True
        return d


def two_point(a: float) -> FiniteDiscrete:
    """Two-point law ``P(-1/a) = a^2/(a^2+1)``, ``P(a) = 1/(a^2+1)``."""
    if not a > 0:
        raise ValueError("a must be positive")
    a2 = a * a
    return FiniteDiscrete((-1.0 / a, float(a)), (a2 / (a2 + 1.0), 1.0 / (a2 + 1.0)), label="TwoPoint", a=float(a))


def rademacher() -> FiniteDiscrete:
    return FiniteDiscrete((-1.0, 1.0), (0.5, 0.5), label="Rademacher")


# ---------------------------------------------------------------------------
# Continuous densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuousDensity(DisorderSpec):
    """Law with a Lebesgue density, optionally tilted by ``delta``.

    ``declared_t0`` is the user's MGF radius; at construction the
    integral of ``exp(+-0.99 t0 x) p(x)`` is probed for finiteness (skipped when
    ``t0`` is infinite).  Expectations use a composite Gauss-Legendre rule on a
    truncated domain, refined by doubling until two rules agree to 1e-13.
    """

    density: Callable[[np.ndarray], np.ndarray]
    declared_t0: float
    support: tuple = (-math.inf, math.inf)
    breakpoints: tuple = ()
    delta: float = 0.0
    name: str = ""
    check_moments: bool = True
    log_density: Callable[[np.ndarray], np.ndarray] | None = None
    _log_norm: float = field(init=False, repr=False, compare=False, default=0.0)

    def __post_init__(self):
        if not self.declared_t0 > 0:
            raise ValueError("t0 must be positive")
        if abs(self.delta) >= self.declared_t0:
            raise TiltOutOfRange(f"delta={self.delta} outside (-t0, t0)")
        if self.delta != 0.0:
            base = ContinuousDensity(
                self.density, self.declared_t0, self.support, self.breakpoints, 0.0, self.name, False,
                self.log_density,
            )
            object.__setattr__(self, "_log_norm", base.log_mgf(self.delta))
            return
        if math.isfinite(self.declared_t0):
            t = 0.99 * self.declared_t0
            for s in (t, -t):
                self._integrate_exp(s)
        if self.check_moments:
            mass = self._integrate(lambda x: 1.0)
            mean = self._integrate(lambda x: x)
            var = self._integrate(lambda x: x * x) - mean**2
            if abs(mass - 1) > 1e-10 or abs(mean) > 1e-10 or abs(var - 1) > 1e-10:
                raise ValueError(
                    f"density must be normalized with mean 0, variance 1 (mass={mass}, mean={mean}, var={var}); "
                    "use ContinuousDensity.standardized"
                )

    @classmethod
    def standardized(cls, density, t0, support=(-math.inf, math.inf), breakpoints=(), name=""):
        """Rescale a (possibly unnormalized) density to mass 1, mean 0, variance 1."""
        raw = cls(density, t0, support, breakpoints, name=name, check_moments=False)
        mass = raw._integrate(lambda x: 1.0)
        mean = raw._integrate(lambda x: x) / mass
        sd = math.sqrt(raw._integrate(lambda x: (x - mean) ** 2) / mass)

        def std_density(x, _p=density):
            return sd * np.asarray(_p(mean + sd * np.asarray(x)), dtype=float) / mass

        lo, hi = support
        return cls(
            std_density,
            t0 * sd,
            ((lo - mean) / sd, (hi - mean) / sd),
            tuple((b - mean) / sd for b in breakpoints),
            name=name,
        )

    @property
    def t0(self) -> float:
        return self.declared_t0

    @property
    def tilted(self) -> bool:
        return self.delta != 0.0

    def _t_range(self) -> tuple[float, float]:
        return (-self.declared_t0 - self.delta, self.declared_t0 - self.delta)

    def _log_weight(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.log_density is not None:
            lp = np.asarray(self.log_density(x), dtype=float)
        else:
            with np.errstate(divide="ignore"):
                lp = np.log(np.asarray(self.density(x), dtype=float))
        if self.delta != 0.0:
            lp = lp + self.delta * x - self._log_norm
        return lp

    def _weight(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self._log_weight(x))

    def _integrate_exp(self, t: float, shift: float = 0.0) -> float:
        """Integral of exp(t x - shift) against this law, evaluated in log space."""
        return self._integrate(None, log_integrand=lambda x: t * x - shift + self._log_weight(x))

    def _domain(self, integrand: Callable) -> tuple[float, float]:
        lo, hi = self.support
        if math.isfinite(lo) and math.isfinite(hi):
            return lo, hi
        r = 8.0
        while True:
            a = lo if math.isfinite(lo) else -r
            b = hi if math.isfinite(hi) else r
            ends = np.array([a, b])
            core = np.abs(_as_values(integrand, np.linspace(a, b, 257)))
            tail = np.abs(_as_values(integrand, ends))
            if not np.all(np.isfinite(tail)):
                raise IntegrabilityViolation("integrand overflows inside the truncation window")
            if tail.max() * r <= 1e-15 * max(core.max(), 1e-300):
                return a, b
            r *= 2.0
            if r > 1.1e5:
                raise IntegrabilityViolation("density tail does not decay fast enough for this integrand")

    def _integrate(self, f: Callable | None, extra_breaks: Sequence[float] = (), log_integrand=None) -> float:
        if log_integrand is not None:
            def integrand(x):
                return np.exp(log_integrand(np.asarray(x, dtype=float)))
        else:
            def integrand(x):
                return _as_values(f, x) * self._weight(x)

        lo, hi = self._domain(integrand)
        bps = list(self.breakpoints) + list(extra_breaks)
        width = (hi - lo) / 64.0
        edges = _panel_edges(lo, hi, width, bps)
        prev = _composite_gl(integrand, edges)
        # relative to the integral of |integrand|, so near-zero results (odd moments) converge too
        scale = _composite_gl(lambda x: np.abs(integrand(x)), edges)
        for _ in range(12):
            width /= 2.0
            cur = _composite_gl(integrand, _panel_edges(lo, hi, width, bps))
            if abs(cur - prev) <= 1e-13 * max(abs(cur), scale, 1e-300):
                return cur
            prev = cur
        raise IntegrabilityViolation("composite quadrature did not converge")

    def log_mgf(self, t: float) -> float:
        self.check_t(t)
        if t == 0.0:
            return 0.0
        return math.log(self._integrate_exp(t))

    def mean_at(self, t: float) -> float:
        self.check_t(t)
        if t == 0.0:
            return self._integrate(lambda x: x)
        return self.tilt(t).expect(lambda x: x)

    def tilt(self, delta: float) -> "ContinuousDensity":
        self.check_t(delta)
        if delta == 0.0:
            return self
        return ContinuousDensity(
            self.density, self.declared_t0, self.support, self.breakpoints, self.delta + delta, self.name, False,
            self.log_density,
        )

    def expect(self, f: Callable, breakpoints: Sequence[float] = ()) -> float:
        return self._integrate(f, breakpoints)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # inverse CDF on a fine tabulation of the (tilted) density
        lo, hi = self._domain(self._weight)
        grid = np.linspace(lo, hi, 1 << 16)
        w = self._weight(grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(grid))])
        cdf /= cdf[-1]
        return np.interp(rng.random(n), cdf, grid)

    def to_dict(self) -> dict:
        if self.name not in _DENSITY_REGISTRY:
            raise ValueError("only registered densities can be serialized")
        d = {"kind": "ContinuousDensity", "params": {"name": self.name}}
        if self.delta != 0.0:
            d["params"]["delta"] = self.delta
        return d


def uniform_density() -> ContinuousDensity:
    """Uniform law on [-sqrt(3), sqrt(3)]."""
    r = math.sqrt(3.0)
    return ContinuousDensity(
        lambda x: np.where(np.abs(x) <= r, 1.0 / (2.0 * r), 0.0), math.inf, (-r, r), name="uniform"
    )


def laplace_density() -> ContinuousDensity:
    """Symmetric Laplace law with scale 1/sqrt(2) (so t0 = sqrt(2))."""
    b = 1.0 / math.sqrt(2.0)
    return ContinuousDensity(
        lambda x: np.exp(-np.abs(x) / b) / (2.0 * b),
        1.0 / b,
        breakpoints=(0.0,),
        name="laplace",
        log_density=lambda x: -np.abs(x) / b - math.log(2.0 * b),
    )


_DENSITY_REGISTRY = {"uniform": uniform_density, "laplace": laplace_density}


# ---------------------------------------------------------------------------
# Functional interface
# ---------------------------------------------------------------------------


def mgf(spec: DisorderSpec, t: float) -> float:
    """M(t) = E[exp(t omega)]; raises TiltOutOfRange for |t| >= t0."""
    if t == 0.0:
        spec.check_t(t)
        return 1.0
    return math.exp(spec.log_mgf(t))


def log_mgf(spec: DisorderSpec, t: float) -> float:
    return spec.log_mgf(t)


def log_mgf_prime(spec: DisorderSpec, delta: float) -> float:
    """m_delta = (log M)'(delta), the mean of the tilted law."""
    return spec.mean_at(delta)


def tilt(spec: DisorderSpec, delta: float) -> DisorderSpec:
    return spec.tilt(delta)


def expectation(spec: DisorderSpec, delta: float, f: Callable, breakpoints: Sequence[float] = ()) -> float:
    """E_delta[f(omega_1)].

    ``f`` must accept a numpy array.  ``breakpoints`` lists points where ``f``
    is not smooth; quadrature panels are split there.
    """
    return spec.tilt(delta).expect(f, breakpoints)


def reflect(spec: DisorderSpec) -> DisorderSpec:
    """Law of ``-omega`` (untilted laws only)."""
    if spec.tilted:
        raise ValueError("reflect expects an untilted law")
    if isinstance(spec, Gaussian):
        return spec
    if isinstance(spec, FiniteDiscrete):
        return FiniteDiscrete(tuple(-v for v in spec.values[::-1]), spec.probs[::-1])
    if isinstance(spec, ContinuousDensity):
        lo, hi = spec.support
        log_density = spec.log_density
        return ContinuousDensity(
            lambda x, _p=spec.density: _p(-np.asarray(x)),
            spec.declared_t0,
            (-hi, -lo),
            tuple(-b for b in spec.breakpoints),
            name="",
            log_density=None if log_density is None else (lambda x, _l=log_density: _l(-np.asarray(x))),
        )
    raise TypeError(type(spec).__name__)


def sample_block(spec: DisorderSpec, delta: float, n: int, seed: int) -> tuple[np.ndarray, float]:
    """Draw ``n`` i.i.d. values from ``P_delta``.

    Returns the draws and ``log(dP_delta/dP)`` of the block,
    ``delta * sum(omega) - n log M(delta)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    law = spec.tilt(delta)
    rng = np.random.default_rng(seed)
    omega = law.sample(rng, n)
    if delta == 0.0:
        return omega, 0.0
    return omega, float(delta * omega.sum() - n * spec.log_mgf(delta))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_dict(spec: DisorderSpec) -> dict:
    return spec.to_dict()


def from_dict(d: dict) -> DisorderSpec:
    kind = d.get("kind")
    params = d.get("params", {}) or {}
    if kind == "StandardGaussian":
        return Gaussian()
    if kind == "Gaussian":
        return Gaussian(mean=float(params.get("mean", 0.0)))
    if kind == "TwoPoint":
        return two_point(float(params["a"]))
    if kind == "Rademacher":
        return rademacher()
    if kind == "FiniteDiscrete":
        atoms = params["atoms"]
        return FiniteDiscrete(
            tuple(float(v) for v, _ in atoms),
            tuple(float(p) for _, p in atoms),
            is_tilted=bool(params.get("tilted", False)),
        )
    if kind == "ContinuousDensity":
        law = _DENSITY_REGISTRY[params["name"]]()
        delta = float(params.get("delta", 0.0))
        return law.tilt(delta) if delta else law
    raise ValueError(f"unknown disorder kind {kind!r}")


def to_json(spec: DisorderSpec) -> str:
    return json.dumps(spec.to_dict(), sort_keys=True)


def from_json(text: str) -> DisorderSpec:
    return from_dict(json.loads(text))
