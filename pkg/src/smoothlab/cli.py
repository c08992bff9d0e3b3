"""Command line entry point ``smoothlab``.

Exit codes: 0 success, 1 check failure, 2 usage or validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import constants as cst
from . import toy
from . import verify
from .config import MAX_SEED, ExperimentConfig, load_config, validate
from .errors import (
    BracketNotFound,
    ConfigError,
    DegenerateEstimate,
    EnumerationTooLarge,
    OutOfImage,
    ParameterOutOfRange,
    QuadratureFailure,
    SmoothlabError,
    TiltOutOfRange,
)
from .pinning import critical_point, free_energy_mc, replica_csv
from .rarestretch import best_tilt, estimate_stretch_set, rare_stretch_experiment

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "SMOOTHLAB_SEED"


class UsageError(Exception):
    pass


def _json(obj) -> str:
    return json.dumps(verify._jsonable(obj), sort_keys=True, indent=2) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands: each returns (text, exit_code)
# ---------------------------------------------------------------------------


def cmd_constants(cfg: ExperimentConfig, workers: int) -> tuple[str, int]:
    spec = cfg.disorder()
    p = cfg.parameters
    s0 = float(p.get("s0", 1.0))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(cst.CSV_HEADER + ["error"])
    failures = 0
    rows = 0
    for beta in p["betas"]:
        for delta in p["deltas"]:
            rows += 1
            beta, delta = float(beta), float(delta)
            try:
                rep = cst.constants_report(spec, beta, delta, s0)
                writer.writerow(["" if v is None else repr(float(v)) for v in rep.csv_row()] + [""])
            except (ParameterOutOfRange, TiltOutOfRange, OutOfImage) as exc:
                failures += 1
                writer.writerow([repr(beta), repr(delta)] + [""] * 7 + [f"{type(exc).__name__}: {exc}"])
    code = EXIT_USAGE if rows and failures == rows else EXIT_OK
    return buf.getvalue(), code


def cmd_free_energy(cfg: ExperimentConfig, workers: int) -> tuple[str, int]:
    p = cfg.parameters
    raw = [] if cfg.execution.get("replica_csv") else None
    est = free_energy_mc(cfg.disorder(), cfg.renewal(), float(p["beta"]), float(p["h"]), float(p["delta"]),
                         int(p["N"]), int(p["replicas"]), cfg.seed(), workers, raw)
    if raw is not None:
        Path(cfg.execution["replica_csv"]).write_text(replica_csv(raw), newline="")
    out = est.to_dict()
    out["error"] = est.error
    return _json(out), EXIT_OK


def cmd_critical_point(cfg: ExperimentConfig, workers: int) -> tuple[str, int]:
    p = cfg.parameters
    tol = float(p.get("tol", 1e-3))
    h_c = critical_point(cfg.disorder(), cfg.renewal(), float(p["beta"]), float(p["delta"]), int(p["N"]),
                         int(p["replicas"]), cfg.seed(), tol=tol, workers=workers)
    out = {"h_c": h_c, "tol": tol, "beta": float(p["beta"]), "delta": float(p["delta"]), "N": int(p["N"]),
           "replicas": int(p["replicas"]), "seed": cfg.seed()}
    return _json(out), EXIT_OK


def cmd_verify(cfg: ExperimentConfig, workers: int) -> tuple[str, int]:
    conf = dict(cfg.checks)
    conf["seed"] = cfg.seed()
    reports = verify.run_all(conf, workers)
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    return verify.reports_json(reports) + "\n", code


def cmd_rare_stretch(cfg: ExperimentConfig, workers: int) -> tuple[str, int]:
    p = cfg.parameters
    spec, renewal = cfg.disorder(), cfg.renewal()
    beta, h, ell, samples = float(p["beta"]), float(p["h"]), int(p["ell"]), int(p["samples"])
    seed = cfg.seed()
    if "G_target" in p:
        exp = estimate_stretch_set(spec, renewal, beta, h, float(p["delta"]), ell, float(p["G_target"]),
                                   samples, seed, workers)
    elif "deltas" in p:
        exp = best_tilt(spec, renewal, beta, h, [float(d) for d in p["deltas"]], ell, samples, seed, workers)
    else:
        exp = rare_stretch_experiment(spec, renewal, beta, h, float(p["delta"]), ell, samples, seed,
                                      eps=p.get("eps"), workers=workers)
    out = exp.report()
    out.update({"delta": exp.delta, "conservative_bound": exp.conservative_bound, "P_delta_hat": exp.P_delta_hat})
    return _json(out), EXIT_OK


def cmd_toy(cfg: ExperimentConfig, workers: int) -> tuple[str, int]:
    p = cfg.parameters
    spec, spins = cfg.disorder(), cfg.spins()
    beta, h, delta = float(p["beta"]), float(p["h"]), float(p["delta"])
    out = {"f": toy.exact_f(spec, spins, beta, h, delta), "beta": beta, "h": h, "delta": delta,
           "spins": spins.to_dict()}
    if "N" in p:
        out["f_N"] = toy.exact_f_finite_N(spec, spins, beta, h, delta, int(p["N"]))
    if "counterexample" in p:
        ce = p["counterexample"]
        rows = toy.derivative_table(float(ce.get("a", 2.0)), [float(b) for b in ce.get("betas", [0.1, 0.05, 0.025])],
                                    ce.get("version", "log"))
        if ce.get("csv"):
            Path(ce["csv"]).write_text(toy.derivative_csv(rows), newline="")
        out["counterexample"] = [dict(zip(toy.DERIVATIVE_CSV_HEADER, r)) for r in rows]
    return _json(out), EXIT_OK


COMMANDS = {
    "constants": cmd_constants,
    "free-energy": cmd_free_energy,
    "critical-point": cmd_critical_point,
    "verify": cmd_verify,
    "rare-stretch": cmd_rare_stretch,
    "toy": cmd_toy,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothlab", description="Smoothing inequalities for disordered pinning.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None, help="64-bit master seed (overrides the config)")
        sp.add_argument("--workers", type=int, default=None, help="worker threads (default: CPU count)")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
    return parser


def _resolve_seed(arg: int | None, cfg: ExperimentConfig) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV} must be an integer") from exc
    return None


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        seed = _resolve_seed(args.seed, cfg)
        if seed is not None:
            if not 0 <= seed <= MAX_SEED:
                raise UsageError("seed must lie in [0, 2^64)")
            cfg.execution["seed"] = seed
        workers = args.workers if args.workers is not None else (cfg.workers() or os.cpu_count() or 1)
        if workers < 1:
            raise UsageError("--workers must be positive")
        validate(cfg, args.command)
        text, code = COMMANDS[args.command](cfg, workers)
    except (UsageError, ConfigError, EnumerationTooLarge) as exc:
        print(f"smoothlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureFailure, BracketNotFound, DegenerateEstimate, OutOfImage, FloatingPointError) as exc:
        print(f"smoothlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterOutOfRange, TiltOutOfRange, ValueError) as exc:
        print(f"smoothlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SmoothlabError as exc:
        print(f"smoothlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(text, args.out or cfg.execution.get("out"))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
