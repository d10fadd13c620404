"""Counter-based Gaussian noise keyed by (seed, trajectory, step).

Each trajectory owns a Philox key derived from ``(seed, trajectory, stream)``.
The raw 64-bit words for step ``s`` live at a fixed counter offset, so the
increments for any step can be regenerated without replaying earlier steps,
and serial and parallel runs see identical numbers.  Normals come from a
Box-Muller transform, which consumes a fixed number of words per sample.
"""

from __future__ import annotations

import numpy as np

# Box-Muller is evaluated on blocks of this many words (rounded to whole
# steps) so array shapes, and therefore rounding, never depend on the caller.
_BLOCK_WORDS = 4096

DYNAMICS = 0
INITIAL = 1


def trajectory_key(seed: int, trajectory: int, stream: int = DYNAMICS) -> np.ndarray:
    return np.random.SeedSequence([seed, trajectory, stream]).generate_state(2, dtype=np.uint64)


def _box_muller(raw: np.ndarray) -> np.ndarray:
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u[..., 0::2]))
    theta = 2.0 * np.pi * u[..., 1::2]
    z = np.empty(u.shape)
    z[..., 0::2] = r * np.cos(theta)
    z[..., 1::2] = r * np.sin(theta)
    return z


class NoiseStream:
    """Gaussian increments for one trajectory.

    ``step`` is the position used by :func:`gaussian_increments`; the
    random-access methods :meth:`normals` and :meth:`block` ignore it.
    """

    def __init__(self, seed: int, trajectory: int = 0, stream: int = DYNAMICS, step: int = 0):
        self.seed = int(seed)
        self.trajectory = int(trajectory)
        self.stream = int(stream)
        self.step = int(step)
        self._key = trajectory_key(self.seed, self.trajectory, self.stream)
        self._cache: tuple[int, int, np.ndarray] | None = None

    def __repr__(self) -> str:
        return f"NoiseStream(seed={self.seed}, trajectory={self.trajectory}, stream={self.stream}, step={self.step})"

    @staticmethod
    def layout(count: int) -> tuple[int, int, int]:
        """``(words, counter stride, steps per block)`` for ``count`` normals per step."""
        words = count + (count & 1)
        stride = -(-words // 4)
        return words, stride, max(1, _BLOCK_WORDS // (4 * stride))

    def _aligned_block(self, index: int, count: int) -> np.ndarray:
        if self._cache is not None and self._cache[:2] == (index, count):
            return self._cache[2]
        words, stride, per_block = self.layout(count)
        counter = np.array([index * per_block * stride, 0, 0, 0], dtype=np.uint64)
        bitgen = np.random.Philox(key=self._key, counter=counter)
        raw = bitgen.random_raw(per_block * stride * 4).reshape(per_block, stride * 4)
        z = _box_muller(raw[:, :words])[:, :count]
        self._cache = (index, count, z)
        return z

    def normals(self, step: int, n_steps: int, count: int) -> np.ndarray:
        """Standard normals for steps ``step .. step+n_steps-1``, shape ``(n_steps, count)``."""
        if count == 0:
            return np.zeros((n_steps, 0))
        per_block = self.layout(count)[2]
        first, last = step // per_block, (step + n_steps - 1) // per_block
        blocks = [self._aligned_block(b, count) for b in range(first, last + 1)]
        z = blocks[0] if len(blocks) == 1 else np.concatenate(blocks)
        offset = step - first * per_block
        return z[offset : offset + n_steps]

    def generator(self) -> np.random.Generator:
        """A numpy Generator on this trajectory's key, for non-Gaussian sampling."""
        return np.random.Generator(np.random.Philox(key=self._key))


def gaussian_increments(stream: NoiseStream, count: int, dt: float) -> np.ndarray:
    """``count`` independent N(0, dt) samples for the stream's current step; advances the step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    z = stream.normals(stream.step, 1, count)[0]
    stream.step += 1
    return z * np.sqrt(dt)


def batch_normals(seed: int, trajectories, step: int, n_steps: int, count: int, stream: int = DYNAMICS) -> np.ndarray:
    """Stacked :meth:`NoiseStream.normals` for several trajectories, shape ``(B, n_steps, count)``."""
    return np.stack([NoiseStream(seed, t, stream).normals(step, n_steps, count) for t in trajectories])
