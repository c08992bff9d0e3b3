"""Golden-output fixtures and their replay.

A fixture is a JSON file::

    {"name": ..., "command": "constants", "config": "../../configs/x.json",
     "tolerance_class": "exact" | "1e-9" | "statistical",
     "digest": "<sha256 of the output>"                       # exact
     "expected": {...}                                          # 1e-9: numbers compared to 1e-9
     "seed": 42, "field": "value", "expected_value": v, "allowance": a}   # statistical

Config paths are relative to the fixture file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

from .cli import run as cli_run

CLASSES = ("exact", "1e-9", "statistical")


@dataclass
class GoldenFixture:
    name: str
    command: str
    config: Path
    tolerance_class: str
    data: dict

    @classmethod
    def load(cls, path: str | Path) -> "GoldenFixture":
        path = Path(path)
        d = json.loads(path.read_text())
        if d.get("tolerance_class") not in CLASSES:
            raise ValueError(f"{path}: tolerance_class must be one of {CLASSES}")
        if d["tolerance_class"] == "statistical" and not {"seed", "expected_value", "allowance"} <= set(d):
            raise ValueError(f"{path}: statistical fixtures need seed, expected_value and allowance")
        return cls(d["name"], d["command"], (path.parent / d["config"]).resolve(), d["tolerance_class"], d)


def produce(command: str, config: Path, seed: int | None = None, workers: int = 1) -> tuple[int, str]:
    """Run a CLI command into a temporary file; return ``(exit_code, output_text)``."""
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "out"
        argv = [command, "--config", str(config), "--workers", str(workers), "--out", str(out)]
        if seed is not None:
            argv += ["--seed", str(seed)]
        code = cli_run(argv)
        text = out.read_text() if out.exists() else ""
    return code, text


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def parse_output(text: str):
    """JSON output as-is; CSV output as a list of row dicts with numeric cells converted."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        rows = list(csv.DictReader(io.StringIO(text)))
        return [{k: _num(v) for k, v in r.items()} for r in rows]


def _num(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        return v


def _close(a, b, tol: float) -> bool:
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k], tol) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_close(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool):
        if math.isnan(a) or math.isnan(b):
            return math.isnan(a) and math.isnan(b)
        return abs(a - b) <= tol
    return a == b


def check_fixture(fx: GoldenFixture, workers: int = 1) -> tuple[bool, str]:
    seed = fx.data.get("seed")
    code, text = produce(fx.command, fx.config, seed, workers)
    if code != fx.data.get("exit_code", 0):
        return False, f"exit code {code}"
    if fx.tolerance_class == "exact":
        got = digest(text)
        return got == fx.data["digest"], f"digest {got[:12]}"
    if fx.tolerance_class == "1e-9":
        ok = _close(parse_output(text), fx.data["expected"], 1e-9)
        return ok, "within 1e-9" if ok else "differs beyond 1e-9"
    value = parse_output(text)[fx.data.get("field", "value")]
    gap = abs(value - fx.data["expected_value"])
    return gap <= fx.data["allowance"], f"|{value} - {fx.data['expected_value']}| = {gap:.3g}"


def regression_run(fixture_dir: str | Path, workers: int = 1) -> list[tuple[str, bool, str]]:
    """Replay every ``*.json`` fixture in ``fixture_dir``; an empty directory passes with a warning."""
    paths = sorted(Path(fixture_dir).glob("*.json"))
    if not paths:
        warnings.warn(f"no fixtures found in {fixture_dir}", stacklevel=2)
        return []
    results = []
    for p in paths:
        fx = GoldenFixture.load(p)
        ok, msg = check_fixture(fx, workers)
        results.append((fx.name, ok, msg))
    return results


def freeze(name: str, command: str, config: str | Path, tolerance_class: str, out_dir: str | Path,
           seed: int | None = None, field: str = "value", allowance: float | None = None) -> Path:
    """Generate a fixture from the current implementation and write it to ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = Path(config).resolve()
    code, text = produce(command, config, seed)
    rel = Path(_relpath(config, out_dir))
    d = {"name": name, "command": command, "config": str(rel), "tolerance_class": tolerance_class, "exit_code": code}
    if tolerance_class == "exact":
        d["digest"] = digest(text)
    elif tolerance_class == "1e-9":
        d["expected"] = parse_output(text)
    else:
        if seed is None or allowance is None:
            raise ValueError("statistical fixtures need a seed and an allowance")
        d.update({"seed": seed, "field": field, "expected_value": parse_output(text)[field], "allowance": allowance})
    path = out_dir / f"{name}.json"
    path.write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    return path


def _relpath(target: Path, start: Path) -> str:
    return os.path.relpath(target, start.resolve())
