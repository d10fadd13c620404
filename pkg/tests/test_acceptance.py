"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Lines are collected and repeated in the pytest terminal summary.  Run the
module directly (``python3 tests/test_acceptance.py``) to print only the
criterion lines.
"""

from __future__ import annotations

import time

from dysonmcf import validate as v
from dysonmcf.cli import main

RESULTS: list[str] = []


def report(title: str, checks) -> bool:
    ok = v.suite_passed(checks)
    gating = [c for c in checks if c.gating]
    summary = "; ".join(f"{c.check} = {c.value:.4g} ({c.op} {c.threshold:.4g})" for c in gating)
    line = f"{'PASS' if ok else 'FAIL'} | {title} | {summary}"
    RESULTS.append(line)
    print(line)
    for c in checks:
        print("    " + c.line())
    return ok


def test_beta_inf_determinism():
    assert report("beta=inf pathwise determinism (n=4, dt=1e-4)", v.determinism_checks())


def test_mean_curvature_identity():
    assert report("Coulomb drift = -H/2 and H = tr II", v.mcf_checks(slope_dims=()))


def test_theorem1_oracle_equivalence():
    start = time.perf_counter()
    checks = []
    for beta in (0.5, 1.0, 2.0, 4.0, 10.0):
        checks += v.theorem1_checks(beta)
    checks.append(v.Check("matrix vs eigenvalue SDE total runtime (s)", time.perf_counter() - start, 900.0))
    assert report("matrix process vs eigenvalue SDE, KS per marginal (Bonferroni 0.01/n)", checks)


def test_beta2_additivity():
    assert report("beta=2 additivity: GUE(t0) start -> GUE(t0+t)", v.additivity_checks())


def test_trace_law():
    assert report("trace law Var = (2/beta) n t; beta=inf trace constant", v.trace_checks())


def test_sum_of_squares_growth():
    assert report("beta=inf growth of sum lam^2 at rate n(n-1)", v.sum_squares_slope_checks((3, 5)))


def test_sphere_example():
    assert report("projected Brownian motion on spheres (q=3)", v.sphere_checks())


def test_collision_stopping():
    assert report("collision stopping, n=2, initial gap 0.05", v.collision_checks())


def test_hadamard_formulas():
    assert report("Hadamard first/second variation vs finite differences", v.hadamard_checks())


def test_reproducibility_across_workers(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 4\nbeta = 1.5\nt_end = 0.05\ndt = 1e-3\nseed = 99\nn_traj = 16\nbatch_size = 2\n")
    codes = [
        main(["simulate-matrix", str(cfg), "--workers", str(w), "-o", str(tmp_path / f"w{w}")]) for w in (1, 8)
    ]
    names = [f"traj_{k:05d}.csv" for k in range(16)]
    differing = sum((tmp_path / "w1" / f).read_bytes() != (tmp_path / "w8" / f).read_bytes() for f in names)
    checks = [
        v.Check("CLI exit codes (max)", max(codes), 0),
        v.Check("CSV files differing between 1 and 8 workers", differing, 0),
    ]
    assert report("byte-identical spectra CSVs across worker counts", checks)


if __name__ == "__main__":
    import pathlib
    import tempfile

    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(pathlib.Path(d))
                else:
                    fn()
            except AssertionError:
                pass
