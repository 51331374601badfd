"""Gaussian sample statistics and the Fréchet distance between them.

The distance between N(m1, C1) and N(m2, C2) is

    ||m1 - m2||^2 + Tr(C1 + C2 - 2 (C1 C2)^(1/2))

computed through the symmetrised product C1^(1/2) C2 C1^(1/2), whose
eigendecomposition is real for PSD inputs; tiny negative eigenvalues
from round-off are clamped at zero, as is a tiny negative total.
Sample covariance uses the n-1 denominator; estimates from fewer
samples than embedding dimensions are flagged rank-deficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, ValidationError


@dataclass
class GaussianStats:
    m: np.ndarray          # (d,)
    C: np.ndarray          # (d, d)
    n: int

    @property
    def dim(self):
        return self.m.shape[0]

    @property
    def rank_deficient(self):
        return self.n <= self.dim


def gaussian_stats(vectors) -> GaussianStats:
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2:
        raise ValidationError(f"expected (n, d) vectors, got shape {v.shape}")
    n = v.shape[0]
    if n < 2:
        raise ValidationError("need at least 2 samples for a covariance")
    m = v.mean(axis=0)
    c = np.atleast_2d(np.cov(v, rowvar=False, ddof=1))
    return GaussianStats(m=m, C=c, n=n)


def sqrtm_psd(c):
    """Symmetric PSD square root via eigendecomposition."""
    sym = (c + c.T) / 2.0
    w, vec = np.linalg.eigh(sym)
    w = np.clip(w, 0.0, None)
    return (vec * np.sqrt(w)) @ vec.T


def frechet_distance(s1: GaussianStats, s2: GaussianStats) -> float:
    if s1.dim != s2.dim:
        raise ValidationError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    diff = s1.m - s2.m
    mean_term = float(diff @ diff)
    root1 = sqrtm_psd(s1.C)
    inner = root1 @ s2.C @ root1
    w = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    if not np.isfinite(w).all():
        bad = w[~np.isfinite(w)]
        raise NumericalError(f"non-finite eigenvalues in covariance product: {bad}")
    trace_sqrt = float(np.sqrt(np.clip(w, 0.0, None)).sum())
    value = mean_term + float(np.trace(s1.C) + np.trace(s2.C)) - 2.0 * trace_sqrt
    if not np.isfinite(value):
        raise NumericalError(f"non-finite Fréchet distance (mean term {mean_term})")
    return max(value, 0.0)
