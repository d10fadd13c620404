"""Gaussian beta-ensemble oracle.

Samples the Dumitriu-Edelman tridiagonal model and diagonalises it with an
implicit-shift QL iteration, independent of the dense Hermitian solver.

Conventions
-----------
The tridiagonal model ``H = T/sqrt(2)`` with ``T_kk ~ N(0, 2)`` and
``T_k,k+1 ~ chi_{beta(n-k)}`` has eigenvalue density proportional to
``prod |lam_k - lam_j|^beta * exp(-sum lam^2 / 2)``.  At ``beta = 2`` this is
the law of the Hermitian matrix whose basis coefficients are i.i.d. N(0, 1),
which is also the law of the projected matrix process at time 1 started
from zero.  The textbook ``(G + G*)/2`` construction has half that variance;
:data:`GUE_SCALE` converts between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenNonConvergence
from .hermitian import basis_expand, eigh
from .noise import INITIAL, NoiseStream

# multiply (G + G*)/2 by this to get unit-variance basis coefficients
GUE_SCALE = math.sqrt(2.0)

QL_MAX_ITER = 60


@dataclass(frozen=True)
class TridiagonalMatrix:
    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diagonal, dtype=float)
        e = np.asarray(self.offdiagonal, dtype=float)
        if d.ndim != 1 or e.shape != (max(len(d) - 1, 0),):
            raise ValueError("offdiagonal must have length n - 1")
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "offdiagonal", e)

    @property
    def n(self) -> int:
        return len(self.diagonal)

    def dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)


def sample_gbe(n: int, beta: float, stream: NoiseStream) -> TridiagonalMatrix:
    """Draw one Dumitriu-Edelman tridiagonal matrix.

    The diagonal is N(0, 1) and the k-th off-diagonal entry (1-based) is
    ``chi_{beta(n-k)} / sqrt(2)``, i.e. ``sqrt(Gamma(beta(n-k)/2, 1))``.
    """
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError("beta must be positive and finite")
    if n < 1:
        raise ValueError("n must be positive")
    gen = stream.generator()
    diag = gen.standard_normal(n)
    shape = beta * np.arange(n - 1, 0, -1) / 2.0
    off = np.sqrt(gen.gamma(shape)) if n > 1 else np.zeros(0)
    return TridiagonalMatrix(diag, off)


def tridiag_eigenvalues(t: TridiagonalMatrix, tol: float = 1e-10) -> np.ndarray:
    """Ascending eigenvalues of a symmetric tridiagonal matrix (implicit QL, Wilkinson-type shift).

    The result is checked against the trace and the Frobenius norm of ``t``
    with relative tolerance ``tol``.
    """
    d = t.diagonal.astype(float).copy()
    n = len(d)
    e = np.zeros(n)
    e[: n - 1] = t.offdiagonal
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= eps * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > QL_MAX_ITER:
                raise EigenNonConvergence(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # split: restart the sweep on the smaller block
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    lam = np.sort(d)
    fro2 = np.sum(t.diagonal**2) + 2.0 * np.sum(t.offdiagonal**2)
    scale = max(1.0, math.sqrt(fro2))
    if abs(lam.sum() - t.diagonal.sum()) > tol * scale or abs(np.sum(lam**2) - fro2) > tol * scale**2:
        raise EigenNonConvergence("tridiagonal eigenvalues failed the trace/norm residual check")
    return lam


def sample_gue_dense(n: int, stream: NoiseStream) -> np.ndarray:
    """``(G + G*)/2`` with standard complex Gaussian ``G`` (E|G_ij|^2 = 1)."""
    gen = stream.generator()
    g = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) * math.sqrt(0.5)
    return 0.5 * (g + g.conj().T)


def sample_gue(n: int, stream: NoiseStream, variance: float = 1.0) -> np.ndarray:
    """Hermitian matrix whose basis coefficients are i.i.d. N(0, variance)."""
    if variance < 0:
        raise ValueError("variance must be non-negative")
    gen = stream.generator()
    return basis_expand(gen.standard_normal(n * n) * math.sqrt(variance))


@dataclass(frozen=True)
class GUEInitial:
    """Per-trajectory random initial matrix for the ensemble engine.

    Trajectory ``i`` draws from its own ``INITIAL`` noise stream, so initial
    conditions never share randomness with the dynamics.
    """

    n: int
    variance: float = 1.0

    def __call__(self, index: int, seed: int) -> np.ndarray:
        return sample_gue(self.n, NoiseStream(seed, index, INITIAL), self.variance)


@dataclass(frozen=True)
class SpectrumOf:
    """Wrap a matrix initial condition so it yields the sorted spectrum instead."""

    matrix_initial: object

    def __call__(self, index: int, seed: int) -> np.ndarray:
        return eigh(self.matrix_initial(index, seed)).spectrum.copy()
