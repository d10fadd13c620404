"""Extrinsic geometry of isospectral orbits.

Tangent bases, the second fundamental form, the mean curvature vector
(un-normalised trace convention ``H = tr II``) and the log-volume gradient of
an orbit.  Mean curvature is reported by its diagonal entries in the
eigenframe, i.e. as a real n-vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum
from .hermitian import (
    SQRT_HALF,
    EigenFrame,
    dagger,
    default_gap,
    min_gap,
    require_simple,
    upper_pairs,
)


@dataclass(frozen=True)
class TangentBasis:
    base_point: EigenFrame
    elements: np.ndarray  # (n*n - n, n, n)

    def __len__(self) -> int:
        return self.elements.shape[0]


@dataclass(frozen=True)
class MeanCurvature:
    base_point: np.ndarray
    vector: np.ndarray


def _check_spectrum(spectrum, delta_gap: float | None = None) -> np.ndarray:
    lam = np.asarray(spectrum, dtype=float)
    if lam.shape[-1] > 1:
        if np.any(np.diff(lam, axis=-1) < 0):
            raise ValueError("spectrum must be ascending")
        thresh = delta_gap if delta_gap is not None else default_gap(np.linalg.norm(lam, axis=-1))
        if np.any(min_gap(lam) <= thresh):
            raise DegenerateSpectrum("spectrum is not simple")
    return lam


def _pairwise_inverse(lam: np.ndarray) -> np.ndarray:
    """Matrix ``1/(lam_l - lam_k)`` with zero diagonal."""
    diff = lam[..., None, :] - lam[..., :, None]
    n = lam.shape[-1]
    diff[..., np.arange(n), np.arange(n)] = np.inf
    return 1.0 / diff


def frame_tangent_basis(n: int) -> np.ndarray:
    """Orthonormal tangent basis at a diagonal base point: ``e_kl`` then ``i E_kl`` per pair."""
    k, l = upper_pairs(n)
    out = np.zeros((2 * len(k), n, n), dtype=complex)
    for m, (a, b) in enumerate(zip(k, l)):
        out[2 * m, a, b] = out[2 * m, b, a] = SQRT_HALF
        out[2 * m + 1, a, b] = 1j * SQRT_HALF
        out[2 * m + 1, b, a] = -1j * SQRT_HALF
    return out


def orbit_tangent_basis(frame: EigenFrame, delta_gap: float | None = None) -> TangentBasis:
    """Orthonormal basis ``{Q e_kl Q*, Q iE_kl Q*}`` of the orbit tangent space at ``frame``."""
    require_simple(frame, delta_gap)
    local = frame_tangent_basis(frame.n)
    return TangentBasis(frame, frame.q[None] @ local @ dagger(frame.q)[None])


def tangent_generator(frame: EigenFrame, x: np.ndarray) -> np.ndarray:
    """Anti-Hermitian, zero-diagonal ``A`` (frame coordinates) with ``Q* X Q = [A, Lambda]``."""
    xt = frame.to_frame(np.asarray(x))
    return xt * _pairwise_inverse(frame.spectrum)


def second_fundamental_form(frame: EigenFrame, a: np.ndarray, delta_gap: float | None = None) -> np.ndarray:
    """``II(X, X) = D([A, [A, Lambda]])`` for the tangent vector ``X = [A, Lambda]``.

    ``a`` is the anti-Hermitian, zero-diagonal generator written in the
    eigenframe of ``frame``.  The result is the diagonal matrix ``D(.)`` in the
    same coordinates; conjugate by ``frame.q`` to get the normal vector at
    ``M = Q Lambda Q*``.
    """
    require_simple(frame, delta_gap)
    a = np.asarray(a, dtype=complex)
    lam = np.diag(frame.spectrum).astype(complex)
    inner = a @ lam - lam @ a
    double = a @ inner - inner @ a
    return np.diag(np.real(np.diagonal(double)))


def mean_curvature(spectrum, delta_gap: float | None = None) -> MeanCurvature:
    """Closed-form mean curvature at ``diag(spectrum)``: ``H_k = 2 sum_{l != k} 1/(lam_l - lam_k)``."""
    lam = _check_spectrum(spectrum, delta_gap)
    return MeanCurvature(lam, 2.0 * np.sum(_pairwise_inverse(lam), axis=-1))


def mean_curvature_via_trace(frame: EigenFrame, delta_gap: float | None = None) -> MeanCurvature:
    """Mean curvature as the trace of II over :func:`orbit_tangent_basis`.

    Each basis element is pulled back to its generator and II is summed term
    by term; the diagonal of the sum in the eigenframe is returned.  Slow, and
    meant as a cross-check for :func:`mean_curvature`.
    """
    basis = orbit_tangent_basis(frame, delta_gap)
    total = np.zeros((frame.n, frame.n))
    for y in basis.elements:
        total += second_fundamental_form(frame, tangent_generator(frame, y), delta_gap)
    return MeanCurvature(np.array(frame.spectrum), np.diagonal(total).copy())


def log_volume_gradient(spectrum, delta_gap: float | None = None) -> np.ndarray:
    """Gradient of ``-log prod_{j<k} (lam_k - lam_j)^2`` with respect to the spectrum."""
    lam = _check_spectrum(spectrum, delta_gap)
    n = lam.shape[-1]
    grad = np.zeros_like(lam)
    for j in range(n):
        for k in range(j + 1, n):
            # d/dlam of -2 log(lam_k - lam_j)
            w = 2.0 / (lam[..., k] - lam[..., j])
            grad[..., j] += w
            grad[..., k] -= w
    return grad
