from __future__ import annotations

import numpy as np
import pytest

from dysonmcf.noise import INITIAL, NoiseStream, batch_normals, gaussian_increments


def test_same_state_same_vector():
    a = gaussian_increments(NoiseStream(5, 2, step=7), 9, 0.01)
    b = gaussian_increments(NoiseStream(5, 2, step=7), 9, 0.01)
    assert np.array_equal(a, b)


def test_increments_advance_the_step():
    s = NoiseStream(1)
    a = gaussian_increments(s, 4, 1.0)
    b = gaussian_increments(s, 4, 1.0)
    assert s.step == 2
    assert not np.array_equal(a, b)
    assert np.array_equal(b, NoiseStream(1).normals(1, 1, 4)[0])


def test_random_access_matches_sequential():
    block = NoiseStream(3, 1).normals(0, 700, 16)
    single = np.stack([NoiseStream(3, 1).normals(k, 1, 16)[0] for k in range(700)])
    assert np.array_equal(block, single)
    assert np.array_equal(NoiseStream(3, 1).normals(250, 300, 16), block[250:550])


def test_moments_of_a_million_samples():
    dt = 0.01
    s = NoiseStream(11)
    z = np.concatenate([gaussian_increments(s, 1000, dt) for _ in range(1000)])
    sigma = np.sqrt(dt)
    assert abs(z.mean()) < 4 * sigma / np.sqrt(z.size)
    assert abs(z.var() / dt - 1) < 0.01


def test_trajectories_are_uncorrelated():
    n = 200_000
    a = NoiseStream(1, 0).normals(0, n // 10, 10).ravel()
    b = NoiseStream(1, 1).normals(0, n // 10, 10).ravel()
    assert abs(np.corrcoef(a, b)[0, 1]) < 3 / np.sqrt(n)


def test_streams_are_distinct():
    a = NoiseStream(1, 0).normals(0, 1, 8)
    assert not np.array_equal(a, NoiseStream(1, 0, INITIAL).normals(0, 1, 8))
    assert not np.array_equal(a, NoiseStream(2, 0).normals(0, 1, 8))


def test_batch_normals_shape_and_rows():
    z = batch_normals(4, [3, 0, 7], 10, 5, 6)
    assert z.shape == (3, 5, 6)
    assert np.array_equal(z[1], NoiseStream(4, 0).normals(10, 5, 6))


def test_zero_count_and_bad_dt():
    assert NoiseStream(0).normals(0, 3, 0).shape == (3, 0)
    with pytest.raises(ValueError):
        gaussian_increments(NoiseStream(0), 3, 0.0)
