"""Empirical distribution tools: ECDF, moments, two-sample KS, spacings,
and the semicircle density."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, EmptySample

KS_TERMS = 100


def _sample(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if a.size == 0:
        raise EmptySample(f"{name} is empty")
    return a


def ecdf(sample, x) -> np.ndarray:
    """Empirical CDF of ``sample`` evaluated at ``x`` (right-continuous)."""
    s = np.sort(_sample(sample, "sample"))
    return np.searchsorted(s, np.asarray(x, dtype=float), side="right") / s.size


def moments(sample, orders=(1, 2, 3, 4)) -> dict[int, float]:
    """Raw empirical moments ``mean(x**k)``."""
    s = _sample(sample, "sample")
    return {k: float(np.mean(s**k)) for k in orders}


def kolmogorov_sf(lam: float) -> float:
    """Tail ``P(K > lam)`` of the Kolmogorov distribution, series truncated at ``KS_TERMS`` terms."""
    if lam <= 0:
        return 1.0
    j = np.arange(1, KS_TERMS + 1)
    terms = 2.0 * (-1.0) ** (j - 1) * np.exp(-2.0 * j**2 * lam**2)
    return float(min(1.0, max(0.0, terms.sum())))


def ks_statistic(a, b) -> float:
    a = np.sort(_sample(a, "a"))
    b = np.sort(_sample(b, "b"))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov test.

    Returns ``(D, p)`` where ``D = sup |F_a - F_b|`` and ``p`` is the
    asymptotic Kolmogorov tail at ``(sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D``
    with effective size ``ne = n_a n_b / (n_a + n_b)``.  The p-value is
    approximate, most of all for small samples.
    """
    a = _sample(a, "a")
    b = _sample(b, "b")
    d = ks_statistic(a, b)
    ne = a.size * b.size / (a.size + b.size)
    rt = math.sqrt(ne)
    return d, kolmogorov_sf((rt + 0.12 + 0.11 / rt) * d)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray  # probability per bin; sums to 1

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def density(self) -> np.ndarray:
        return self.mass / np.diff(self.edges)

    def mass_below(self, x: float) -> float:
        """Total mass of bins lying entirely below ``x``."""
        return float(self.mass[self.edges[1:] <= x + 1e-12].sum())


def normalized_spacings(spectra) -> np.ndarray:
    """Nearest-neighbour gaps pooled over all spectra, divided by their mean."""
    gaps = []
    for lam in spectra:
        g = np.diff(np.asarray(lam, dtype=float))
        if np.any(g <= 0):
            raise DegenerateSpectrum("spacings need ascending simple spectra")
        gaps.append(g)
    s = np.concatenate(gaps) if gaps else np.zeros(0)
    if s.size == 0:
        raise EmptySample("no spacings: need spectra with at least two eigenvalues")
    return s / s.mean()


def spacing_distribution(spectra, width: float = 0.1, upper: float = 4.0) -> Histogram:
    """Histogram of mean-normalised spacings with bins ``[k width, (k+1) width)``.

    The range is widened past ``upper`` when needed so no spacing is dropped.
    """
    s = normalized_spacings(spectra)
    top = max(upper, float(s.max()))
    nbins = int(math.floor(top / width)) + 1
    edges = width * np.arange(nbins + 1)
    idx = np.minimum((s / width).astype(int), nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    return Histogram(edges, counts / s.size)


def semicircle_reference(x, radius: float = 2.0):
    """Semicircle density ``2/(pi r^2) sqrt(r^2 - x^2)`` on ``[-r, r]``, zero outside."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float)
    inside = np.clip(radius**2 - x**2, 0.0, None)
    out = 2.0 / (math.pi * radius**2) * np.sqrt(inside)
    return float(out) if out.ndim == 0 else out
