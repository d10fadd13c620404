from __future__ import annotations

import math
import os

import numpy as np
import pytest

from dysonmcf.engine import COLLISION, COMPLETED, MODEL_FAILURE, SimConfig, integrate, run_ensemble
from dysonmcf.errors import ConfigError, DegenerateSpectrum
from dysonmcf.processes import EigenModel, MatrixModel, Observation, coulomb_flow, equally_spaced


class ScalarBM:
    """dY = sigma dB in one dimension."""

    noise_count = 1
    columns = ("y",)

    def __init__(self, sigma=1.0, fail_above=None):
        self.sigma = sigma
        self.fail_above = fail_above

    def prepare(self, state):
        return np.atleast_1d(np.asarray(state, dtype=float))

    def observe(self, state, previous=None):
        failed = ~np.isfinite(state[:, 0])
        if self.fail_above is not None:
            failed |= state[:, 0] > self.fail_above
        return Observation(state.copy(), np.zeros(len(state), dtype=bool), failed)

    def step(self, state, obs, dt, noise):
        return state + self.sigma * noise


def test_zero_diffusion_is_constant():
    cfg = SimConfig(1, 1.0, 1.0, 0.1, record_every=1)
    rec = integrate(ScalarBM(sigma=0.0), cfg, 0.5)
    assert np.all(rec.values == 0.5)
    assert rec.stop_reason == COMPLETED and rec.stopped_at is None


def test_scalar_brownian_terminal_variance():
    cfg = SimConfig(1, 1.0, 2.0, 0.05, seed=4, record_every=40)
    recs = run_ensemble(ScalarBM(), cfg, 0.0, 5000, batch_size=1000)
    y = np.array([r.terminal[0] for r in recs])
    assert abs(y.var() / 2.0 - 1) < 0.05


def test_record_rows_and_times():
    cfg = SimConfig(2, 2.0, 0.1, 1e-3, record_every=10)
    rec = integrate(EigenModel(2, 2.0), cfg, equally_spaced(2))
    assert len(rec.times) == cfg.steps // 10 + 1
    assert np.all(np.diff(rec.times) > 0)
    assert np.allclose(rec.times, np.arange(len(rec.times)) * 0.01)
    assert np.all(np.diff(rec.values, axis=1) > 0)


def test_collision_stops_and_keeps_last_valid_state():
    cfg = SimConfig(2, 0.5, 1.0, 1e-3, seed=1, delta_gap=0.05, record_every=7)
    recs = run_ensemble(EigenModel(2, 0.5, 0.05), cfg, np.array([-0.05, 0.05]), 50)
    stopped = [r for r in recs if r.stop_reason == COLLISION]
    assert stopped
    for r in stopped:
        assert r.stopped_at is not None and r.stopped_at <= 1.0
        assert np.array_equal(r.values[-1], r.terminal)
        assert math.isclose(r.times[-1], r.stopped_at - cfg.dt)
        # no recorded spectrum at or below the threshold
        assert np.all(np.diff(r.values, axis=1) > 0.05)


def test_model_failure_is_flagged_without_aborting():
    cfg = SimConfig(1, 1.0, 1.0, 0.01, seed=2)
    recs = run_ensemble(ScalarBM(fail_above=0.5), cfg, 0.0, 20)
    failed = [r for r in recs if r.stop_reason == MODEL_FAILURE]
    assert failed and len(failed) < 20
    assert all(not r.valid for r in failed)
    assert all(r.values[-1, 0] <= 0.5 for r in failed)


def test_results_independent_of_batching_and_workers():
    cfg = SimConfig(3, 1.5, 0.05, 1e-3, seed=12, record_every=5)
    m0 = np.diag(equally_spaced(3))
    a = run_ensemble(MatrixModel(3, 1.5), cfg, m0, 9, batch_size=9)
    b = run_ensemble(MatrixModel(3, 1.5), cfg, m0, 9, batch_size=2)
    c = run_ensemble(MatrixModel(3, 1.5), cfg, m0, 9, workers=3, batch_size=4)
    single = integrate(MatrixModel(3, 1.5), cfg, m0, trajectory=5)
    for x, y, z in zip(a, b, c):
        assert np.array_equal(x.values, y.values) and np.array_equal(x.values, z.values)
    assert [r.index for r in c] == list(range(9))
    assert np.array_equal(single.values, a[5].values)


def test_same_seed_reproduces():
    cfg = SimConfig(2, 1.0, 0.1, 1e-3, seed=77)
    a = integrate(EigenModel(2, 1.0), cfg, equally_spaced(2), trajectory=3)
    b = integrate(EigenModel(2, 1.0), cfg, equally_spaced(2), trajectory=3)
    assert np.array_equal(a.values, b.values)


def test_rejects_bad_requests():
    cfg = SimConfig(2, 1.0, 0.1, 1e-3)
    with pytest.raises(ConfigError):
        run_ensemble(EigenModel(2, 1.0), cfg, equally_spaced(2), 0)
    with pytest.raises(DegenerateSpectrum):
        integrate(EigenModel(2, 1.0), cfg, np.array([0.0, 0.0]))


@pytest.mark.parametrize(
    "kwargs, key",
    [
        (dict(dt=0.0), "dt"),
        (dict(dt=2.0), "dt"),
        (dict(beta=0.0), "beta"),
        (dict(delta_gap=-1.0), "delta_gap"),
        (dict(record_every=0), "record_every"),
        (dict(seed=-1), "seed"),
    ],
)
def test_config_invariants(kwargs, key):
    base = dict(n=2, beta=1.0, t_end=1.0, dt=0.01)
    with pytest.raises(ConfigError) as err:
        SimConfig(**{**base, **kwargs})
    assert err.value.key == key


def test_config_accepts_infinite_beta():
    cfg = SimConfig(2, math.inf, 1.0, 0.01)
    assert cfg.to_dict()["beta"] == "inf"
    assert cfg.steps == 100


def test_euler_is_first_order_at_beta_inf():
    lam0 = np.array([-0.6, 0.1, 0.5])
    _, ref = coulomb_flow(lam0, 0.5, 1e-6, record_every=500_000)

    def err(dt):
        rec = integrate(EigenModel(3, math.inf), SimConfig(3, math.inf, 0.5, dt), lam0)
        return np.max(np.abs(rec.terminal - ref[-1]))

    ratio = err(2e-3) / err(1e-3)
    assert 1.8 < ratio < 2.2


@pytest.mark.skipif((os.cpu_count() or 1) < 8, reason="throughput benchmark needs at least 8 CPU cores")
def test_parallel_throughput():
    import time

    cfg = SimConfig(8, 2.0, 0.02, 1e-3, seed=1, record_every=20)
    m0 = np.diag(equally_spaced(8))
    t0 = time.perf_counter()
    run_ensemble(MatrixModel(8, 2.0), cfg, m0, 1000, workers=1, batch_size=125)
    serial = time.perf_counter() - t0
    t0 = time.perf_counter()
    run_ensemble(MatrixModel(8, 2.0), cfg, m0, 1000, workers=8, batch_size=125)
    assert serial / (time.perf_counter() - t0) >= 4
