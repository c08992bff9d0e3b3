"""Experiment configuration: four JSON sections validated at load time.

```
{"model":      {"disorder": {...}, "renewal": {"alpha": 0.8}, "spins": {"atoms": [[0, 0.5], [1, 0.5]]}},
 "parameters": {"beta": 0.5, "h": 0.0, "delta": 0.1, "N": 4096, "replicas": 64, ...},
 "execution":  {"seed": 42, "workers": 4, "out": "report.json"},
 "checks":     {"names": [...], "sigma": 3.0, "exact_tolerance": 1e-9}}
```
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import disorder as dis
from .errors import ConfigError
from .pinning import RenewalLaw
from .toy import ProductSpinSpec

SECTIONS = ("model", "parameters", "execution", "checks")
MAX_SEED = 2**64 - 1

# parameters each command needs
REQUIRED = {
    "constants": ("betas", "deltas"),
    "free-energy": ("beta", "h", "delta", "N", "replicas"),
    "critical-point": ("beta", "delta", "N", "replicas"),
    "verify": (),
    "rare-stretch": ("beta", "h", "ell", "samples"),
    "toy": ("beta", "h", "delta"),
}


@dataclass
class ExperimentConfig:
    model: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    execution: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {name: copy.deepcopy(getattr(self, name)) for name in SECTIONS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(d) - set(SECTIONS)
        if extra:
            raise ConfigError(f"unknown config section(s): {', '.join(sorted(extra))}")
        for name in SECTIONS:
            if not isinstance(d.get(name, {}), dict):
                raise ConfigError(f"section '{name}' must be an object")
        return cls(**{name: copy.deepcopy(d.get(name, {})) for name in SECTIONS})

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    # -- typed accessors ----------------------------------------------------

    def disorder(self) -> dis.DisorderSpec:
        d = self.model.get("disorder", {"kind": "StandardGaussian"})
        try:
            return dis.from_dict(d)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"model.disorder: {exc}") from exc

    def renewal(self) -> RenewalLaw:
        r = self.model.get("renewal", {})
        if "alpha" not in r:
            raise ConfigError("missing field model.renewal.alpha")
        try:
            return RenewalLaw(float(r["alpha"]), float(r.get("defect", 0.0)))
        except ValueError as exc:
            raise ConfigError(f"model.renewal: {exc}") from exc

    def spins(self) -> ProductSpinSpec:
        s = self.model.get("spins")
        if s is None:
            raise ConfigError("missing field model.spins")
        try:
            return ProductSpinSpec.from_dict(s)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"model.spins: {exc}") from exc

    def param(self, name: str, default=None):
        if name in self.parameters:
            return self.parameters[name]
        if default is None:
            raise ConfigError(f"missing field parameters.{name}")
        return default

    def seed(self) -> int:
        return int(self.execution.get("seed", 0))

    def workers(self) -> int | None:
        w = self.execution.get("workers")
        return None if w is None else int(w)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_json(text)


def _is_pow2(n) -> bool:
    return isinstance(n, int) and n >= 2 and not n & (n - 1)


def validate(cfg: ExperimentConfig, command: str) -> None:
    """Check required fields and cross-field constraints for ``command``."""
    if command not in REQUIRED:
        raise ConfigError(f"unknown command {command!r}")
    for name in REQUIRED[command]:
        if name not in cfg.parameters:
            raise ConfigError(f"missing field parameters.{name}")
    seed = cfg.execution.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
        raise ConfigError("execution.seed must be an integer in [0, 2^64)")
    workers = cfg.execution.get("workers")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        raise ConfigError("execution.workers must be a positive integer")

    p = cfg.parameters
    if command in ("free-energy", "critical-point", "rare-stretch", "constants", "toy"):
        spec = cfg.disorder()
        t0 = spec.t0
        for key in ("delta",):
            if key in p and not abs(float(p[key])) < t0:
                raise ConfigError(f"parameters.{key}={p[key]} outside the tilt radius t0={t0}")
        for d in p.get("deltas", []) if command == "rare-stretch" else []:
            if not abs(float(d)) < t0:
                raise ConfigError(f"parameters.deltas entry {d} outside the tilt radius t0={t0}")
    if command in ("free-energy", "critical-point"):
        cfg.renewal()
        if not _is_pow2(p["N"]):
            raise ConfigError(f"parameters.N={p['N']} must be a power of two >= 2")
        if not isinstance(p["replicas"], int) or p["replicas"] < 2:
            raise ConfigError("parameters.replicas must be an integer >= 2")
    if command == "rare-stretch":
        cfg.renewal()
        if not isinstance(p["samples"], int) or p["samples"] < 100:
            raise ConfigError(f"parameters.samples={p['samples']} must be an integer >= 100")
        if not isinstance(p["ell"], int) or p["ell"] < 8:
            raise ConfigError(f"parameters.ell={p['ell']} must be an integer >= 8")
        if "delta" not in p and "deltas" not in p:
            raise ConfigError("missing field parameters.delta (or parameters.deltas)")
    if command == "constants":
        s0 = float(p.get("s0", 1.0))
        if not s0 > 0 or math.isnan(s0):
            raise ConfigError("parameters.s0 must be positive")
    if command == "toy":
        spins = cfg.spins()
        spec = cfg.disorder()
        beta, delta = float(p["beta"]), float(p["delta"])
        if not beta * spins.s0 + abs(delta) < spec.t0:
            raise ConfigError("beta * s0 + |delta| must stay below t0")
    if command == "verify":
        names = cfg.checks.get("names")
        if names is not None and not isinstance(names, list):
            raise ConfigError("checks.names must be a list")
