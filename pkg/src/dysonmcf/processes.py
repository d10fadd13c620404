"""Dynamics: projected matrix Brownian motion, Dyson's eigenvalue SDE,
the Coulomb flow, and Brownian motion constrained to spheres.

Single-step functions work on one state and validate their inputs.  The
``*Model`` classes wrap the same updates for the ensemble engine: they act
on stacks of states with a leading trajectory axis and report stops through
masks instead of exceptions.

Noise arguments are Wiener increments, i.e. already N(0, dt) distributed.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import Collision, DegenerateSpectrum, ZeroVector
from .geometry import mean_curvature
from .hermitian import (
    EigenFrame,
    basis_expand,
    default_gap,
    eigh,
    hermitize,
    is_hermitian,
    jacobi_eigh,
    min_gap,
    normal_part,
    require_simple,
)


def equally_spaced(n: int) -> np.ndarray:
    """Default initial spectrum: ``n`` equally spaced points in ``[-1, 1]``."""
    return np.zeros(1) if n == 1 else np.linspace(-1.0, 1.0, n)


def noise_coefficient(beta: float) -> float:
    """``sqrt(2/beta)``; zero for ``beta = inf``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return 0.0 if math.isinf(beta) else math.sqrt(2.0 / beta)


# --------------------------------------------------------------------------
# matrix process


def _projected_update(m, q, dx, coef):
    # P(dX) + c P_perp(dX) = dX + (c - 1) P_perp(dX)
    return m + dx + (coef - 1.0) * normal_part(q, dx)


def projected_bm_step(
    m: np.ndarray,
    beta: float,
    dt: float,
    noise: np.ndarray,
    delta_gap: float | None = None,
    frame: EigenFrame | None = None,
) -> np.ndarray:
    """One Euler-Maruyama step of ``dM = P_M dX + sqrt(2/beta) P_perp_M dX``.

    ``noise`` holds the n*n basis coefficients of the Hermitian increment
    ``dX`` in :func:`~dysonmcf.hermitian.hermitian_basis` order.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = np.asarray(m, dtype=complex)
    if frame is None:
        frame = eigh(m)
    require_simple(frame, delta_gap)
    dx = basis_expand(noise)
    if dx.shape != m.shape:
        raise ValueError("noise length must be n*n")
    return _projected_update(m, frame.q, dx, noise_coefficient(beta))


# --------------------------------------------------------------------------
# eigenvalue dynamics


def coulomb_drift(lam: np.ndarray) -> np.ndarray:
    """Pairwise repulsion ``sum_{k != j} 1/(lam_j - lam_k)``."""
    lam = np.asarray(lam, dtype=float)
    diff = lam[..., :, None] - lam[..., None, :]
    n = lam.shape[-1]
    diff[..., np.arange(n), np.arange(n)] = np.inf
    return np.sum(1.0 / diff, axis=-1)


def _check_chamber(lam, delta_gap):
    lam = np.asarray(lam, dtype=float)
    thresh = delta_gap if delta_gap is not None else default_gap(np.linalg.norm(lam, axis=-1))
    if lam.shape[-1] > 1 and np.any(min_gap(lam) <= thresh):
        raise DegenerateSpectrum("spectrum must be strictly ascending with gaps above delta_gap")
    return lam, thresh


def dyson_eigen_step(
    lam: np.ndarray, beta: float, dt: float, noise: np.ndarray, delta_gap: float | None = None
) -> np.ndarray:
    """Euler-Maruyama step of ``d lam_j = sqrt(2/beta) dB_j + sum_{k != j} dt/(lam_j - lam_k)``.

    Raises :class:`Collision` if the result is not strictly ascending with
    every gap above ``delta_gap``.
    """
    lam, thresh = _check_chamber(lam, delta_gap)
    new = lam + noise_coefficient(beta) * np.asarray(noise, dtype=float) + dt * coulomb_drift(lam)
    if new.shape[-1] > 1 and np.any(min_gap(new) <= thresh):
        raise Collision("eigenvalues collided during the step")
    return new


def coulomb_ode_step(lam: np.ndarray, dt: float, delta_gap: float | None = None) -> np.ndarray:
    """Explicit Euler step of the deterministic Coulomb flow (the beta = inf eigenvalue dynamics)."""
    lam, thresh = _check_chamber(lam, delta_gap)
    new = lam + dt * coulomb_drift(lam)
    if new.shape[-1] > 1 and np.any(min_gap(new) <= thresh):
        raise Collision("eigenvalues collided during the step")
    return new


def coulomb_flow(lam0, t_end: float, dt: float, record_every: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Explicit Euler solution of the Coulomb flow; returns ``(times, spectra)`` every ``record_every`` steps.

    A lean loop for fine reference solutions; it stops with :class:`Collision`
    instead of recording a partial path.
    """
    lam = np.array(lam0, dtype=float)
    _check_chamber(lam, None)
    steps = int(round(t_end / dt))
    n = lam.size
    off = ~np.eye(n, dtype=bool)
    times, rows = [0.0], [lam.copy()]
    for k in range(1, steps + 1):
        diff = lam[:, None] - lam[None, :]
        lam = lam + dt * np.sum(np.divide(1.0, diff, where=off, out=np.zeros((n, n))), axis=1)
        if k % record_every == 0:
            if n > 1 and np.min(np.diff(lam)) <= 0:
                raise Collision("Coulomb flow lost the eigenvalue ordering")
            times.append(k * dt)
            rows.append(lam.copy())
    return np.array(times), np.array(rows)


def mcf_velocity_check(lam: np.ndarray) -> float:
    """Max-norm gap between the Coulomb drift and ``-H/2`` at ``diag(lam)``."""
    lam = np.asarray(lam, dtype=float)
    h = mean_curvature(lam).vector
    return float(np.max(np.abs(coulomb_drift(lam) + 0.5 * h)))


# --------------------------------------------------------------------------
# sphere example


def _radius(z):
    r = np.linalg.norm(z, axis=-1)
    if np.any(r == 0):
        raise ZeroVector("state vector has zero length")
    return r


def _project_tangent(z, w):
    r2 = np.sum(z * z, axis=-1, keepdims=True)
    return w - z * (np.sum(z * w, axis=-1, keepdims=True) / r2)


def sphere_ito_step(z: np.ndarray, dt: float, noise: np.ndarray) -> np.ndarray:
    """Euler-Maruyama step of ``dZ = (I - Z Z^T/|Z|^2) dW``."""
    z = np.asarray(z, dtype=float)
    _radius(z)
    return z + _project_tangent(z, np.asarray(noise, dtype=float))


def sphere_stratonovich_step(z: np.ndarray, dt: float, noise: np.ndarray) -> np.ndarray:
    """Heun step of the Stratonovich equation ``dZ = (I - Z Z^T/|Z|^2) o dW``."""
    z = np.asarray(z, dtype=float)
    _radius(z)
    noise = np.asarray(noise, dtype=float)
    first = _project_tangent(z, noise)
    predictor = z + first
    return z + 0.5 * (first + _project_tangent(predictor, noise))


def mean_curvature_force_sphere(z: np.ndarray) -> np.ndarray:
    """Inward drift ``-((q-1)/(2|Z|)) Z/|Z|``; half the mean curvature of the sphere through Z."""
    z = np.asarray(z, dtype=float)
    r = _radius(z)[..., None]
    q = z.shape[-1]
    return -((q - 1) / (2.0 * r)) * z / r


def sphere_ito_drift_step(z: np.ndarray, dt: float, noise: np.ndarray) -> np.ndarray:
    """Ito form of Brownian motion on the sphere: projected noise plus the curvature drift."""
    return sphere_ito_step(z, dt, noise) + dt * mean_curvature_force_sphere(z)


# --------------------------------------------------------------------------
# ensemble models


class Observation(NamedTuple):
    values: np.ndarray  # (B, m) recorded quantities
    stop: np.ndarray  # (B,) model-signalled stop, e.g. a collision
    failed: np.ndarray  # (B,) the model could not produce a valid state
    aux: np.ndarray | None = None


def _gap_stop(spectrum, delta_gap):
    if spectrum.shape[-1] < 2:
        return np.zeros(spectrum.shape[0], dtype=bool)
    thresh = delta_gap if delta_gap is not None else default_gap(np.linalg.norm(spectrum, axis=-1))
    return min_gap(spectrum) <= thresh


class MatrixModel:
    """Projected matrix Brownian motion; records the ordered spectrum."""

    def __init__(self, n: int, beta: float, delta_gap: float | None = None):
        self.n = int(n)
        self.beta = float(beta)
        self.delta_gap = delta_gap
        self.coef = noise_coefficient(self.beta)
        self.noise_count = self.n * self.n
        self.columns = tuple(f"lambda_{j + 1}" for j in range(self.n))

    def __repr__(self) -> str:
        return f"MatrixModel(n={self.n}, beta={self.beta}, delta_gap={self.delta_gap})"

    def prepare(self, state) -> np.ndarray:
        m = np.asarray(state, dtype=complex)
        if m.shape != (self.n, self.n) or not is_hermitian(m, 1e-10):
            raise ValueError(f"initial state must be a Hermitian {self.n}x{self.n} matrix")
        return hermitize(m)

    def observe(self, state: np.ndarray, previous: Observation | None = None) -> Observation:
        guess = None if previous is None else previous.aux
        w, q, ok = jacobi_eigh(state, guess=guess)
        failed = ~ok | ~np.all(np.isfinite(w), axis=-1)
        return Observation(w, _gap_stop(w, self.delta_gap), failed, q)

    def step(self, state, obs: Observation, dt: float, noise: np.ndarray) -> np.ndarray:
        return _projected_update(state, obs.aux, basis_expand(noise), self.coef)


class EigenModel:
    """Dyson's eigenvalue SDE; ``beta = inf`` gives the noiseless Coulomb flow."""

    def __init__(self, n: int, beta: float, delta_gap: float | None = None):
        self.n = int(n)
        self.beta = float(beta)
        self.delta_gap = delta_gap
        self.coef = noise_coefficient(self.beta)
        self.noise_count = 0 if self.coef == 0 else self.n
        self.columns = tuple(f"lambda_{j + 1}" for j in range(self.n))

    def __repr__(self) -> str:
        return f"EigenModel(n={self.n}, beta={self.beta}, delta_gap={self.delta_gap})"

    def prepare(self, state) -> np.ndarray:
        lam = np.asarray(state, dtype=float)
        if lam.shape != (self.n,):
            raise ValueError(f"initial spectrum must have length {self.n}")
        return lam

    def observe(self, state, previous=None) -> Observation:
        # the raw state is recorded; a crossing shows up as a non-positive gap
        failed = ~np.all(np.isfinite(state), axis=-1)
        return Observation(state, _gap_stop(state, self.delta_gap), failed)

    def step(self, state, obs, dt, noise):
        with np.errstate(divide="ignore", invalid="ignore"):
            new = state + dt * coulomb_drift(state)
        if self.noise_count:
            new = new + self.coef * noise
        return new


class SphereModel:
    """Projected Brownian motion in R^q; records the radius ``|Z|``.

    ``variant`` is ``"ito"`` (projected noise, Ito), ``"stratonovich"``
    (Heun) or ``"ito_drift"`` (Ito with the inward curvature drift).
    """

    _steps = {
        "ito": sphere_ito_step,
        "stratonovich": sphere_stratonovich_step,
        "ito_drift": sphere_ito_drift_step,
    }

    def __init__(self, q: int, variant: str = "ito"):
        if q < 2:
            raise ValueError("q must be at least 2; the tangent space of S^0 is trivial")
        if variant not in self._steps:
            raise ValueError(f"unknown sphere variant {variant!r}")
        self.q = int(q)
        self.variant = variant
        self.noise_count = self.q
        self.columns = ("r",)

    def __repr__(self) -> str:
        return f"SphereModel(q={self.q}, variant={self.variant!r})"

    def prepare(self, state) -> np.ndarray:
        z = np.asarray(state, dtype=float)
        if z.shape != (self.q,):
            raise ValueError(f"initial point must have length {self.q}")
        _radius(z)
        return z

    def observe(self, state, previous=None) -> Observation:
        r = np.linalg.norm(state, axis=-1)
        failed = ~np.isfinite(r) | (r == 0)
        return Observation(r[:, None], np.zeros(len(r), dtype=bool), failed)

    def step(self, state, obs, dt, noise):
        return self._steps[self.variant](state, dt, noise)
