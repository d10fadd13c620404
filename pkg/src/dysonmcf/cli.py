"""Command-line interface.

Exit codes: 0 success, 1 a trajectory failed or a validation check failed,
2 bad configuration or unknown suite, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, parse_float, parse_value, require
from .engine import MODEL_FAILURE, SimConfig, integrate, run_ensemble
from .errors import ConfigError, DegenerateSpectrum, ModelFailure
from .geometry import mean_curvature
from .output import (
    MANIFEST,
    build_manifest,
    read_manifest,
    trajectory_filename,
    write_json,
    write_record,
    write_table,
)
from .processes import EigenModel, MatrixModel, SphereModel, equally_spaced, mcf_velocity_check
from .validate import run_suite, suite_names, suite_passed

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

_SIM_KEYS = ("n", "beta", "t_end", "dt", "seed", "n_traj", "output")


def _override_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("config", nargs="?", help="key = value configuration file")
    p.add_argument("--manifest", help="reuse the configuration stored in a manifest (file or output directory)")
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=lambda s: parse_float(s, "beta"), help="positive real or inf")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--delta-gap", dest="delta_gap", type=float)
    p.add_argument("--record-every", dest="record_every", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lambda0", type=lambda s: parse_value("lambda0", s), help="comma-separated initial spectrum")
    p.add_argument("--q", type=int)
    p.add_argument("--r0", type=float)
    p.add_argument("-o", "--output", help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any key")
    return p


_OVERRIDES = (
    "n", "beta", "t_end", "dt", "seed", "n_traj", "delta_gap", "record_every",
    "workers", "batch_size", "lambda0", "q", "r0", "output",
)


def _collect_config(args) -> dict:
    base = {}
    if args.manifest:
        try:
            stored = read_manifest(args.manifest)["config"]
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read manifest {args.manifest}: {exc}") from None
        for key, value in stored.items():
            if value is None:
                continue
            text = ",".join(str(v) for v in value) if isinstance(value, list) else str(value)
            base[key] = parse_value(key, text)
    cfg = load_config(args.config, None)
    base.update(cfg)
    overrides = {k: getattr(args, k) for k in _OVERRIDES}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = parse_value(key.strip(), value)
    return {**base, **{k: v for k, v in overrides.items() if v is not None}}


def _sim_config(cfg: dict, n: int) -> SimConfig:
    return SimConfig(
        n=n,
        beta=cfg.get("beta", math.inf),
        t_end=cfg["t_end"],
        dt=cfg["dt"],
        seed=cfg.get("seed", 0),
        delta_gap=cfg.get("delta_gap"),
        record_every=cfg.get("record_every", 1),
    )


def _initial_spectrum(cfg: dict) -> np.ndarray:
    n = cfg["n"]
    lam0 = np.array(cfg["lambda0"], dtype=float) if "lambda0" in cfg else equally_spaced(n)
    if lam0.shape != (n,):
        raise ConfigError(f"lambda0 must have {n} entries", "lambda0")
    if n > 1 and np.any(np.diff(lam0) <= 0):
        raise ConfigError("lambda0 must be strictly ascending", "lambda0")
    return lam0


def _prepare_output(cfg: dict) -> Path:
    out = Path(cfg["output"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_ensemble(out: Path, records, subdir: str = "") -> list[str]:
    files = []
    target = out / subdir if subdir else out
    target.mkdir(parents=True, exist_ok=True)
    for rec in records:
        name = trajectory_filename(rec.index)
        write_record(target / name, rec)
        files.append(f"{subdir}/{name}" if subdir else name)
    return files


def _simulate(command: str, cfg: dict, model_cls, initial_of) -> int:
    require(cfg, *_SIM_KEYS)
    n = cfg["n"]
    sim = _sim_config(cfg, n)
    model = model_cls(n, sim.beta, sim.delta_gap)
    out = _prepare_output(cfg)
    start = time.perf_counter()
    records = run_ensemble(
        model, sim, initial_of(_initial_spectrum(cfg)), cfg["n_traj"], cfg.get("workers", 1), cfg.get("batch_size", 64)
    )
    wall = time.perf_counter() - start
    files = _write_ensemble(out, records)
    write_json(out / MANIFEST, build_manifest(command, cfg, records, files, wall))
    return EXIT_FAILED if any(r.stop_reason == MODEL_FAILURE for r in records) else EXIT_OK


def cmd_simulate_matrix(cfg: dict) -> int:
    return _simulate("simulate-matrix", cfg, MatrixModel, np.diag)


def cmd_simulate_eigen(cfg: dict) -> int:
    return _simulate("simulate-eigen", cfg, EigenModel, lambda lam: lam)


def cmd_flow_mcf(cfg: dict) -> int:
    """Coulomb flow with the spectrum, -H/2, drift discrepancy, minimum gap and sum of eigenvalues per row."""
    if "n" not in cfg and "lambda0" in cfg:
        cfg["n"] = len(cfg["lambda0"])
    require(cfg, "n", "t_end", "dt", "output")
    n = cfg["n"]
    sim = _sim_config({**cfg, "beta": math.inf}, n)
    out = _prepare_output(cfg)
    start = time.perf_counter()
    rec = integrate(EigenModel(n, math.inf, sim.delta_gap), sim, _initial_spectrum(cfg))
    wall = time.perf_counter() - start
    half_h = np.array([-0.5 * mean_curvature(row).vector for row in rec.values])
    discrepancy = np.array([mcf_velocity_check(row) for row in rec.values])
    gaps = np.min(np.diff(rec.values, axis=1), axis=1) if n > 1 else np.full(len(rec.times), np.inf)
    header = ("t",) + rec.columns + tuple(f"neg_half_H_{j + 1}" for j in range(n)) + ("discrepancy", "min_gap", "sum_lambda")
    columns = [rec.times, *rec.values.T, *half_h.T, discrepancy, gaps, rec.values.sum(axis=1)]
    write_table(out / "flow.csv", header, columns)
    write_json(out / MANIFEST, build_manifest("flow-mcf", cfg, [rec], ["flow.csv"], wall))
    return EXIT_OK


def cmd_sphere(cfg: dict) -> int:
    """Radial series of projected Brownian motion in R^q, Ito and Stratonovich variants."""
    require(cfg, "q", "t_end", "dt", "seed", "n_traj", "output")
    q = cfg["q"]
    if q < 2:
        raise ConfigError("q must be at least 2: the tangent space of S^0 is trivial", "q")
    r0 = cfg.get("r0", 1.0)
    if not r0 > 0:
        raise ConfigError("r0 must be positive", "r0")
    sim = _sim_config({**cfg, "beta": 1.0}, q)
    z0 = np.zeros(q)
    z0[0] = r0
    out = _prepare_output(cfg)
    start = time.perf_counter()
    all_records, files = [], []
    for variant in ("ito", "stratonovich"):
        records = run_ensemble(
            SphereModel(q, variant), sim, z0, cfg["n_traj"], cfg.get("workers", 1), cfg.get("batch_size", 64)
        )
        files += _write_ensemble(out, records, variant)
        all_records += records
    wall = time.perf_counter() - start
    extra = {"variants": ["ito", "stratonovich"], "radius_law": f"sqrt({r0}^2 + {q - 1} t)"}
    write_json(out / MANIFEST, build_manifest("sphere", cfg, all_records, files, wall, extra))
    return EXIT_FAILED if any(r.stop_reason == MODEL_FAILURE for r in all_records) else EXIT_OK


def cmd_validate(name: str, report: Path | None, options: dict) -> int:
    if name not in suite_names():
        print(f"error: unknown suite {name!r}; known: {', '.join(suite_names())}", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    checks = run_suite(name, **options)
    wall = time.perf_counter() - start
    for c in checks:
        print(c.line())
    ok = suite_passed(checks)
    if report is not None:
        write_json(
            report,
            {"suite": name, "pass": ok, "wall_time_s": wall, "artifact_version": __version__,
             "checks": [c.to_dict() for c in checks]},
        )
    return EXIT_OK if ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dysonmcf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    parent = _override_parser()
    sub.add_parser("simulate-matrix", parents=[parent], help="projected matrix Brownian motion")
    sub.add_parser("simulate-eigen", parents=[parent], help="Dyson eigenvalue SDE")
    sub.add_parser("flow-mcf", parents=[parent], help="Coulomb flow with mean-curvature columns")
    sub.add_parser("sphere", parents=[parent], help="projected Brownian motion on spheres")
    val = sub.add_parser("validate", help="run a named validation suite")
    val.add_argument("suite")
    val.add_argument("-o", "--output", help="JSON report path")
    val.add_argument("--n-traj", dest="n_traj", type=int, help="ensemble size for stochastic suites")
    val.add_argument("--workers", type=int)
    return parser


_COMMANDS = {
    "simulate-matrix": cmd_simulate_matrix,
    "simulate-eigen": cmd_simulate_eigen,
    "flow-mcf": cmd_flow_mcf,
    "sphere": cmd_sphere,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            options = {k: getattr(args, k) for k in ("n_traj", "workers") if getattr(args, k) is not None}
            return cmd_validate(args.suite, Path(args.output) if args.output else None, options)
        return _COMMANDS[args.command](_collect_config(args))
    except (ConfigError, DegenerateSpectrum) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
