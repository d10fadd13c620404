"""Hermitian matrix kernel.

Frobenius geometry on the space of complex Hermitian matrices, a cyclic
Jacobi eigensolver, spectral projectors and the tangent/normal splitting
along isospectral orbits ``{Q M Q* : Q unitary}``.

Matrices are plain ``complex128`` arrays.  Unless stated otherwise functions
accept a single matrix ``(n, n)`` or a stack ``(..., n, n)`` and treat the
leading axes as batch axes.  Eigenvalue indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np

from .errors import DegenerateSpectrum, EigenNonConvergence

SQRT_HALF = np.sqrt(0.5)

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def frobenius_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Real inner product ``Re Tr(A B*)``."""
    return np.real(np.sum(a * np.conj(b), axis=(-2, -1)))


def frobenius_norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        return False
    scale = np.maximum(1.0, frobenius_norm(m))
    return bool(np.all(frobenius_norm(m - dagger(m)) <= tol * scale))


def default_gap(norm) -> np.ndarray:
    """Collision threshold ``1e-8 (1 + ||M||_F)`` used when none is given."""
    return 1e-8 * (1.0 + np.asarray(norm, dtype=float))


def min_gap(spectrum: np.ndarray) -> np.ndarray:
    """Smallest consecutive difference of ascending spectra (``inf`` for n=1)."""
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape[-1] < 2:
        return np.full(spectrum.shape[:-1], np.inf)
    return np.min(np.diff(spectrum, axis=-1), axis=-1)


@lru_cache(maxsize=None)
def upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs ``k < l`` in lexicographic order."""
    k, l = np.triu_indices(n, 1)
    k.flags.writeable = False
    l.flags.writeable = False
    return k, l


@lru_cache(maxsize=None)
def hermitian_basis(n: int) -> np.ndarray:
    """Frobenius-orthonormal basis of the n x n Hermitian matrices, shape ``(n*n, n, n)``.

    Order: the n diagonal units ``e_j e_j^T``; then for every pair ``k < l``
    (lexicographic) the symmetric element ``(e_k e_l^T + e_l e_k^T)/sqrt2``
    followed by the antisymmetric element ``i (e_k e_l^T - e_l e_k^T)/sqrt2``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    basis = np.zeros((n * n, n, n), dtype=complex)
    for j in range(n):
        basis[j, j, j] = 1.0
    alpha = n
    for k, l in zip(*upper_pairs(n)):
        basis[alpha, k, l] = basis[alpha, l, k] = SQRT_HALF
        basis[alpha + 1, k, l] = 1j * SQRT_HALF
        basis[alpha + 1, l, k] = -1j * SQRT_HALF
        alpha += 2
    basis.flags.writeable = False
    return basis


def basis_expand(coeffs: np.ndarray) -> np.ndarray:
    """``sum_alpha coeffs[..., alpha] E_alpha`` without materialising the basis."""
    coeffs = np.asarray(coeffs, dtype=float)
    n = isqrt(coeffs.shape[-1])
    if n * n != coeffs.shape[-1]:
        raise ValueError(f"expected n*n coefficients, got {coeffs.shape[-1]}")
    out = np.zeros(coeffs.shape[:-1] + (n, n), dtype=complex)
    idx = np.arange(n)
    out[..., idx, idx] = coeffs[..., :n]
    k, l = upper_pairs(n)
    off = (coeffs[..., n::2] + 1j * coeffs[..., n + 1 :: 2]) * SQRT_HALF
    out[..., k, l] = off
    out[..., l, k] = np.conj(off)
    return out


def basis_coefficients(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`basis_expand`: ``<M, E_alpha>`` for every alpha."""
    m = np.asarray(m)
    n = m.shape[-1]
    k, l = upper_pairs(n)
    out = np.empty(m.shape[:-2] + (n * n,))
    out[..., :n] = np.real(np.diagonal(m, axis1=-2, axis2=-1))
    upper = m[..., k, l]
    out[..., n::2] = np.sqrt(2.0) * upper.real
    out[..., n + 1 :: 2] = np.sqrt(2.0) * upper.imag
    return out


def _offdiag_norm(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=-1))


def jacobi_eigh(
    m: np.ndarray,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
    guess: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalisation of a stack of Hermitian matrices.

    Returns ``(w, v, converged)`` with eigenvalues ascending, eigenvectors in
    the columns of ``v`` normalised so that the largest-modulus entry of each
    column is real and positive, and a boolean ``converged`` mask.  A matrix
    stops rotating once its off-diagonal norm drops below
    ``tol * ||M||_F``, so every matrix in a stack gets exactly the result it
    would get on its own.

    ``guess`` is an optional unitary (stack) used as the starting basis; a
    basis close to the answer, such as the previous time step's, cuts the
    number of sweeps.
    """
    a = np.array(m, dtype=np.complex128)
    batch_shape, n = a.shape[:-2], a.shape[-1]
    a = a.reshape(-1, n, n)
    if guess is None:
        v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    else:
        v = np.array(np.broadcast_to(guess, a.shape), dtype=np.complex128)
        a = hermitize(dagger(v) @ a @ v)
    thresh = tol * np.maximum(frobenius_norm(a), np.finfo(float).tiny)
    active = _offdiag_norm(a) > thresh
    sweeps = 0
    while active.any() and sweeps < max_sweeps:
        for p, q in zip(*upper_pairs(n)):
            apq = a[:, p, q]
            mag = np.abs(apq)
            rot = active & (mag > 0)
            if not rot.any():
                continue
            safe = np.where(rot, mag, 1.0)
            phase = np.where(rot, apq / safe, 1.0)
            tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(rot, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # V = diag(1, e^{-i phi}) @ [[c, s], [-s, c]] acting on (p, q)
            vqp = (-s * np.conj(phase))[:, None]
            vqq = (c * np.conj(phase))[:, None]
            cs, sc = c[:, None], s[:, None]
            for mat in (a, v):
                colp, colq = mat[:, :, p].copy(), mat[:, :, q]
                mat[:, :, p] = cs * colp + vqp * colq
                mat[:, :, q] = sc * colp + vqq * colq
            rowp, rowq = a[:, p, :].copy(), a[:, q, :]
            a[:, p, :] = cs * rowp + np.conj(vqp) * rowq
            a[:, q, :] = sc * rowp + np.conj(vqq) * rowq
            a[:, p, q] = np.where(rot, 0.0, a[:, p, q])
            a[:, q, p] = np.where(rot, 0.0, a[:, q, p])
            a[:, p, p] = np.where(rot, a[:, p, p].real, a[:, p, p])
            a[:, q, q] = np.where(rot, a[:, q, q].real, a[:, q, q])
        sweeps += 1
        active &= _offdiag_norm(a) > thresh
    converged = ~active

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1)).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    v = _fix_phases(v)
    return (
        w.reshape(batch_shape + (n,)),
        v.reshape(batch_shape + (n, n)),
        converged.reshape(batch_shape),
    )


def _fix_phases(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    # ties within rounding go to the lowest row index
    near_max = mags >= mags.max(axis=-2, keepdims=True) * (1.0 - 1e-10)
    pivot_row = np.argmax(near_max, axis=-2)[..., None, :]
    pivot = np.take_along_axis(v, pivot_row, axis=-2)
    v = v * (np.conj(pivot) / np.abs(pivot))
    np.put_along_axis(v, pivot_row, np.abs(pivot), axis=-2)
    return v


@dataclass(frozen=True)
class EigenFrame:
    """Ascending spectrum and unitary eigenvector matrix with ``M = Q diag(spectrum) Q*``.

    ``spectrum`` has shape ``(..., n)`` and ``q`` shape ``(..., n, n)``; a
    frame may carry leading batch axes.
    """

    spectrum: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        spectrum = np.array(self.spectrum, dtype=float)
        q = np.array(self.q, dtype=complex)
        if q.shape[-2:] != (spectrum.shape[-1],) * 2 or q.shape[:-2] != spectrum.shape[:-1]:
            raise ValueError("spectrum and eigenvector shapes disagree")
        spectrum.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "spectrum", spectrum)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.spectrum.shape[-1]

    @property
    def min_gap(self) -> np.ndarray:
        return min_gap(self.spectrum)

    def matrix(self) -> np.ndarray:
        return hermitize((self.q * self.spectrum[..., None, :]) @ dagger(self.q))

    def to_frame(self, x: np.ndarray) -> np.ndarray:
        """Coordinates ``Q* X Q`` of a matrix in this eigenbasis."""
        return dagger(self.q) @ x @ self.q

    def from_frame(self, y: np.ndarray) -> np.ndarray:
        return self.q @ y @ dagger(self.q)


def eigh(m: np.ndarray) -> EigenFrame:
    """Eigen-decomposition of a Hermitian matrix (or stack) via cyclic Jacobi."""
    m = np.asarray(m)
    if not is_hermitian(m, tol=1e-10):
        raise ValueError("matrix is not Hermitian")
    w, v, converged = jacobi_eigh(m)
    if not np.all(converged):
        raise EigenNonConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    return EigenFrame(w, v)


def require_simple(frame: EigenFrame, delta_gap: float | None = None) -> None:
    if frame.n < 2:
        return
    thresh = delta_gap if delta_gap is not None else default_gap(np.linalg.norm(frame.spectrum, axis=-1))
    gaps = frame.min_gap
    if np.any(gaps <= thresh):
        raise DegenerateSpectrum(f"minimum eigenvalue gap {np.min(gaps):.3g} is at or below threshold")


def spectral_projector(frame: EigenFrame, j: int) -> np.ndarray:
    """Rank-one projector ``(Q e_j)(Q e_j)*`` onto the j-th eigenvector."""
    if not 0 <= j < frame.n:
        raise IndexError(f"eigen-index {j} out of range for n={frame.n}")
    col = frame.q[..., :, j]
    return col[..., :, None] * np.conj(col[..., None, :])


def normal_part(q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``sum_j Tr(X P_j) P_j`` for the eigenbasis ``q``; no gap check."""
    d = np.real(np.diagonal(dagger(q) @ x @ q, axis1=-2, axis2=-1))
    return hermitize((q * d[..., None, :]) @ dagger(q))


def normal_projection(frame: EigenFrame, x: np.ndarray, delta_gap: float | None = None) -> np.ndarray:
    """Orthogonal projection of ``x`` onto the normal space of the orbit through ``frame``.

    The normal space consists of matrices diagonal in the eigenbasis, so the
    projection keeps the diagonal of ``Q* X Q``.
    """
    require_simple(frame, delta_gap)
    return normal_part(frame.q, np.asarray(x))


def tangent_projection(frame: EigenFrame, x: np.ndarray, delta_gap: float | None = None) -> np.ndarray:
    """Projection onto the orbit tangent space, ``X - normal_projection(X)``."""
    x = np.asarray(x)
    return x - normal_projection(frame, x, delta_gap)


def hadamard_first(frame: EigenFrame, a: np.ndarray, j: int, delta_gap: float | None = None) -> float:
    """First derivative of the j-th ordered eigenvalue along ``a``: ``(Q* A Q)_jj``."""
    require_simple(frame, delta_gap)
    return np.real(frame.to_frame(np.asarray(a))[..., j, j])


def hadamard_second(
    frame: EigenFrame, a: np.ndarray, b: np.ndarray, j: int, delta_gap: float | None = None
) -> float:
    """Second derivative of the j-th ordered eigenvalue along ``(a, b)``.

    Computes ``2 sum_{k != j} Re[(Q*AQ)_kj conj((Q*BQ)_kj)] / (lambda_j - lambda_k)``.
    For complex perturbations the product of matrix entries is taken in the
    Hermitian-symmetric form, which keeps the result real, symmetric in
    ``(a, b)``, and equal to ``2 sum |(Q*AQ)_kj|^2 / (lambda_j - lambda_k)``
    on the diagonal ``a = b``.
    """
    require_simple(frame, delta_gap)
    at = frame.to_frame(np.asarray(a))[..., :, j]
    bt = frame.to_frame(np.asarray(b))[..., :, j]
    lam = frame.spectrum
    diff = lam[..., j, None] - lam
    diff[..., j] = np.inf
    return 2.0 * np.sum(np.real(at * np.conj(bt)) / diff, axis=-1)
