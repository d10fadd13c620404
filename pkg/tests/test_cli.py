from __future__ import annotations

import json
import math

import numpy as np
import pytest

from dysonmcf.cli import main
from dysonmcf.config import parse_text, render
from dysonmcf.errors import ConfigError
from dysonmcf.output import read_table
from dysonmcf.processes import coulomb_flow


def write_cfg(path, **entries):
    path.write_text("".join(f"{k} = {v}\n" for k, v in entries.items()))
    return str(path)


BASE = dict(n=3, beta=2, t_end=0.05, dt=0.001, seed=1, n_traj=3)


def test_config_round_trip():
    cfg = parse_text("n = 4  # size\nbeta = inf\nlambda0 = -1, 0.5, 2\n\noutput = out\n")
    assert cfg == {"n": 4, "beta": math.inf, "lambda0": [-1.0, 0.5, 2.0], "output": "out"}
    assert parse_text(render(cfg)) == cfg
    with pytest.raises(ConfigError) as err:
        parse_text("colour = blue")
    assert err.value.key == "colour"


def test_simulate_matrix_outputs(tmp_path):
    cfg = write_cfg(tmp_path / "m.cfg", **BASE, record_every=10, output=tmp_path / "out")
    assert main(["simulate-matrix", cfg]) == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    for key in ("config", "seed", "n_traj", "stop_reasons", "artifact_version", "wall_time_s"):
        assert key in manifest
    assert manifest["n_traj"] == 3 and manifest["seed"] == 1
    header, data = read_table(tmp_path / "out" / "traj_00002.csv")
    assert header == ["t", "lambda_1", "lambda_2", "lambda_3"]
    assert data.shape[0] == 50 // 10 + 1
    line = (tmp_path / "out" / "traj_00002.csv").read_text().splitlines()[2]
    assert len(line.split(",")[1].lstrip("-").replace(".", "").lstrip("0")) >= 15


def test_missing_key_names_it(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "m.cfg", n=3, beta=2, dt=0.001, seed=1, n_traj=2, output=tmp_path / "o")
    assert main(["simulate-matrix", cfg]) == 2
    assert "t_end" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "e.cfg", **{**BASE, "beta": "abc"}, output=tmp_path / "o")
    assert main(["simulate-eigen", cfg]) == 2
    assert "beta" in capsys.readouterr().err


def test_overrides_and_infinity_token(tmp_path):
    cfg = write_cfg(tmp_path / "m.cfg", **BASE, output=tmp_path / "o")
    assert main(["simulate-eigen", cfg, "--beta", "inf", "--n-traj", "1", "--set", "record_every=50"]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["config"]["beta"] == "inf" and manifest["n_traj"] == 1


def test_beta_inf_matrix_runs_are_seed_stable(tmp_path):
    # same seed: byte-identical; different seeds: eigenvalue paths agree to discretisation error
    args = dict(BASE, beta="inf", n=4, t_end=0.1)
    runs = {}
    for name, seed in (("a", 1), ("b", 1), ("c", 2)):
        cfg = write_cfg(tmp_path / f"{name}.cfg", **{**args, "seed": seed}, output=tmp_path / name)
        assert main(["simulate-matrix", cfg]) == 0
        runs[name] = tmp_path / name / "traj_00000.csv"
    assert runs["a"].read_bytes() == runs["b"].read_bytes()
    diff = np.abs(read_table(runs["a"])[1] - read_table(runs["c"])[1]).max()
    assert diff < 0.05


def test_regenerate_from_manifest(tmp_path):
    cfg = write_cfg(tmp_path / "m.cfg", **BASE, output=tmp_path / "first")
    assert main(["simulate-matrix", cfg]) == 0
    assert main(["simulate-matrix", "--manifest", str(tmp_path / "first"), "-o", str(tmp_path / "again")]) == 0
    for k in range(3):
        name = f"traj_{k:05d}.csv"
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "again" / name).read_bytes()


def test_simulate_eigen_beta_inf_is_the_ode(tmp_path):
    cfg = write_cfg(tmp_path / "e.cfg", **{**BASE, "beta": "inf", "n_traj": 1}, lambda0="-0.5,0.1,0.7", output=tmp_path / "o")
    assert main(["simulate-eigen", cfg]) == 0
    _, data = read_table(tmp_path / "o" / "traj_00000.csv")
    _, ref = coulomb_flow([-0.5, 0.1, 0.7], 0.05, 0.001)
    assert np.allclose(data[:, 1:], ref, atol=1e-15)


def test_simulate_eigen_gap_law(tmp_path):
    cfg = write_cfg(tmp_path / "e.cfg", n=2, beta="inf", t_end=1, dt=1e-5, seed=0, n_traj=1,
                    record_every=100000, lambda0="0,1", output=tmp_path / "o")
    assert main(["simulate-eigen", cfg]) == 0
    _, data = read_table(tmp_path / "o" / "traj_00000.csv")
    assert abs((data[-1, 2] - data[-1, 1]) / math.sqrt(5) - 1) < 1e-3


def test_flow_mcf_columns(tmp_path):
    assert main(["flow-mcf", "--lambda0", "0,1", "--t-end", "1", "--dt", "1e-5", "--record-every", "1000",
                 "-o", str(tmp_path / "f")]) == 0
    header, data = read_table(tmp_path / "f" / "flow.csv")
    col = {name: data[:, k] for k, name in enumerate(header)}
    assert np.all(np.abs(col["min_gap"] / np.sqrt(1 + 4 * col["t"]) - 1) < 1e-3)
    assert np.all(col["discrepancy"] <= 1e-12)
    assert np.allclose(col["sum_lambda"], 1.0, atol=1e-12)


def test_sphere_command(tmp_path):
    assert main(["sphere", "--q", "3", "--t-end", "0.5", "--dt", "1e-4", "--seed", "2", "--n-traj", "20",
                 "--record-every", "5000", "-o", str(tmp_path / "s")]) == 0
    ito = np.array([read_table(tmp_path / "s" / "ito" / f"traj_{k:05d}.csv")[1][-1, 1] for k in range(20)])
    strat = np.array([read_table(tmp_path / "s" / "stratonovich" / f"traj_{k:05d}.csv")[1][-1, 1] for k in range(20)])
    assert np.all(np.abs(ito - math.sqrt(2)) < 5e-2)
    assert np.all(np.abs(strat - 1) < 1e-2)


def test_sphere_rejects_q1(tmp_path, capsys):
    code = main(["sphere", "--q", "1", "--t-end", "1", "--dt", "0.1", "--seed", "0", "--n-traj", "1",
                 "-o", str(tmp_path / "s")])
    assert code == 2
    assert "q" in capsys.readouterr().err


def test_validate_mcf_report(tmp_path):
    report = tmp_path / "r.json"
    assert main(["validate", "mcf", "-o", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["pass"] is True
    assert {"check", "value", "threshold", "pass"} <= set(data["checks"][0])


def test_validate_theorem1_beta2_small(tmp_path):
    assert main(["validate", "theorem1-beta2", "--n-traj", "150", "-o", str(tmp_path / "r.json")]) == 0


def test_validate_unknown_suite():
    assert main(["validate", "no-such-suite"]) == 2


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_cfg(tmp_path / "m.cfg", **BASE, output=blocker / "sub")
    assert main(["simulate-matrix", cfg]) == 3
