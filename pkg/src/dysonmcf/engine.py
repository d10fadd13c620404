"""Fixed-step ensemble integration.

A model (see :mod:`dysonmcf.processes`) provides ``prepare``, ``observe``,
``step``, ``noise_count`` and ``columns``.  The engine advances a stack of
trajectories in lock-step, feeds each one its own counter-based noise, records
every ``record_every``-th state, and freezes a trajectory at the first step
where the model signals a stop or a failure.  Because noise is keyed by
``(seed, trajectory, step)`` and all updates act row-wise, a trajectory's
record does not depend on how the ensemble is split into batches or workers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateSpectrum, ModelFailure
from .noise import NoiseStream

COMPLETED = "completed"
COLLISION = "collision"
MODEL_FAILURE = "model_failure"

_MAX_SEED = 2**64


@dataclass(frozen=True)
class SimConfig:
    n: int
    beta: float
    t_end: float
    dt: float
    seed: int = 0
    delta_gap: float | None = None
    record_every: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be a positive integer", "n")
        if not (self.beta > 0):
            raise ConfigError("beta must be positive or inf", "beta")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError("dt must be positive", "dt")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError("t_end must be positive", "t_end")
        if self.dt >= self.t_end:
            raise ConfigError("dt must be smaller than t_end", "dt")
        if int(self.seed) != self.seed or not 0 <= self.seed < _MAX_SEED:
            raise ConfigError("seed must be an integer in [0, 2**64)", "seed")
        if self.delta_gap is not None and not self.delta_gap > 0:
            raise ConfigError("delta_gap must be positive", "delta_gap")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError("record_every must be a positive integer", "record_every")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.beta):
            d["beta"] = "inf"
        return d


@dataclass
class TrajectoryRecord:
    """Recorded path of one trajectory.

    ``values`` has one row per recorded time; its columns are named by
    ``columns`` (the ordered spectrum for the matrix and eigenvalue models).
    ``terminal`` is the last valid state: the state at ``t_end`` for completed
    runs, the state just before the stop otherwise.
    """

    index: int
    seed: int
    times: np.ndarray
    values: np.ndarray
    columns: tuple
    terminal: np.ndarray
    stop_reason: str = COMPLETED
    stopped_at: float | None = None
    config: SimConfig | None = None
    states: np.ndarray | None = field(default=None, repr=False)
    final_state: np.ndarray | None = field(default=None, repr=False)

    @property
    def spectra(self) -> np.ndarray:
        return self.values

    @property
    def valid(self) -> bool:
        return self.stop_reason != MODEL_FAILURE

    @property
    def stopped(self) -> bool:
        return self.stop_reason != COMPLETED


def _take(obs, rows):
    return type(obs)(*(None if x is None else x[rows] for x in obs))


def _initial_state(model, initial, index: int, seed: int):
    state = initial(index, seed) if callable(initial) else initial
    return model.prepare(state)


def integrate_batch(model, config: SimConfig, initial, indices, record_states: bool = False) -> list[TrajectoryRecord]:
    """Integrate the trajectories ``indices`` together.

    ``initial`` is either one state shared by every trajectory or a callable
    ``initial(index, seed)`` returning the state of trajectory ``index``.
    """
    indices = [int(i) for i in indices]
    b = len(indices)
    if b == 0:
        return []
    dt = config.dt
    steps = config.steps
    every = config.record_every
    count = model.noise_count
    n_rows = steps // every + 2

    state = np.stack([_initial_state(model, initial, i, config.seed) for i in indices])
    obs = model.observe(state)
    if np.any(obs.failed):
        raise ModelFailure("initial state could not be diagonalised")
    if np.any(obs.stop):
        raise DegenerateSpectrum("initial spectrum is not simple")

    m = obs.values.shape[-1]
    times = np.full((b, n_rows), np.nan)
    values = np.full((b, n_rows, m), np.nan)
    kept = np.zeros((b, n_rows) + state.shape[1:], dtype=state.dtype) if record_states else None
    n_rec = np.zeros(b, dtype=int)
    terminal = np.array(obs.values, dtype=float)
    final_state = state.copy()
    last_step = np.full(b, steps)
    reason = np.array([COMPLETED] * b, dtype=object)

    def record(rows, k, vals, st):
        times[rows, n_rec[rows]] = k * dt
        values[rows, n_rec[rows]] = vals
        if kept is not None:
            kept[rows, n_rec[rows]] = st
        n_rec[rows] += 1

    alive = np.arange(b)
    record(alive, 0, obs.values, state)
    streams = [NoiseStream(config.seed, i) for i in indices]
    per_block = NoiseStream.layout(count)[2] if count else 0
    window, start = None, 0

    for k in range(1, steps + 1):
        if count:
            if window is None or k - 1 - start >= window.shape[1]:
                start = k - 1
                n_win = min(per_block - start % per_block, steps - start)
                window = np.stack([streams[i].normals(start, n_win, count) for i in alive])
            noise = window[:, k - 1 - start] * math.sqrt(dt)
        else:
            noise = None
        new_state = model.step(state, obs, dt, noise)
        with np.errstate(all="ignore"):
            new_obs = model.observe(new_state, obs)
        halt = new_obs.failed | new_obs.stop
        if np.any(halt):
            hit = np.nonzero(halt)[0]
            rows = alive[hit]
            reason[rows] = np.where(new_obs.failed[hit], MODEL_FAILURE, COLLISION)
            last_step[rows] = k - 1
            terminal[rows] = obs.values[hit]
            final_state[rows] = state[hit]
            # close the record with the last valid state unless it is already there
            if (k - 1) % every:
                record(rows, k - 1, obs.values[hit], state[hit])
            keep = np.nonzero(~halt)[0]
            alive = alive[keep]
            if len(alive) == 0:
                break
            state, obs = new_state[keep], _take(new_obs, keep)
            if count:
                window = window[keep]
        else:
            state, obs = new_state, new_obs
        if k % every == 0:
            record(alive, k, obs.values, state)

    if len(alive):
        terminal[alive] = obs.values
        final_state[alive] = state

    out = []
    for r, i in enumerate(indices):
        rows = n_rec[r]
        stopped = reason[r] != COMPLETED
        out.append(
            TrajectoryRecord(
                index=i,
                seed=config.seed,
                times=times[r, :rows].copy(),
                values=values[r, :rows].copy(),
                columns=tuple(model.columns),
                terminal=terminal[r].copy(),
                stop_reason=str(reason[r]),
                stopped_at=(last_step[r] + 1) * dt if stopped else None,
                config=config,
                states=None if kept is None else kept[r, :rows].copy(),
                final_state=final_state[r].copy(),
            )
        )
    return out


def integrate(model, config: SimConfig, initial, trajectory: int = 0, record_states: bool = False) -> TrajectoryRecord:
    """Integrate a single trajectory."""
    return integrate_batch(model, config, initial, [trajectory], record_states)[0]


def _run_chunk(args):
    model, config, initial, indices, record_states = args
    return integrate_batch(model, config, initial, indices, record_states)


def run_ensemble(
    model,
    config: SimConfig,
    initial,
    n_traj: int,
    workers: int = 1,
    batch_size: int = 64,
    record_states: bool = False,
) -> list[TrajectoryRecord]:
    """Integrate trajectories ``0 .. n_traj-1``; the result is ordered by index.

    Work is cut into fixed chunks of ``batch_size`` trajectories, so the
    output is the same for every ``workers`` value.  With ``workers > 1``
    chunks run in a process pool, and ``model`` and ``initial`` must be
    picklable.
    """
    if int(n_traj) != n_traj or n_traj < 1:
        raise ConfigError("n_traj must be a positive integer", "n_traj")
    if workers < 1 or batch_size < 1:
        raise ConfigError("workers and batch_size must be positive", "workers")
    chunks = [list(range(s, min(s + batch_size, n_traj))) for s in range(0, n_traj, batch_size)]
    jobs = [(model, config, initial, c, record_states) for c in chunks]
    if workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    return [rec for part in parts for rec in part]


def timed_ensemble(*args, **kwargs) -> tuple[list[TrajectoryRecord], float]:
    """:func:`run_ensemble` plus its wall time in seconds."""
    start = time.perf_counter()
    records = run_ensemble(*args, **kwargs)
    return records, time.perf_counter() - start
