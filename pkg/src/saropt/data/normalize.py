"""SAR amplitude normalisation to [-1, 1].

The saturation threshold is a multiple of the image mean taken over
the non-zero pixels:

    x_bar = lambda * sum(x_i) / (N - n)

with N the pixel count and n the count of exactly-zero pixels (SAR
products pad with exact zeros, so the zero test is exact, not a
tolerance).  Values at or below zero map to -1, values at or above
x_bar saturate to 1, and the rest scale linearly as 2x/x_bar - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, ValidationError

DEFAULT_LAMBDA = 2000.0


@dataclass(frozen=True)
class NormalizationParams:
    lam: float
    x_bar: float
    n_total: int
    n_zero: int


def normalize_sar(pixels, lam=DEFAULT_LAMBDA):
    """Normalise one amplitude channel; returns (normalised, params)."""
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    x = np.asarray(pixels, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValidationError("non-finite amplitudes")
    n_total = x.size
    n_zero = int(np.count_nonzero(x == 0.0))
    if n_total == n_zero:
        raise DegenerateInputError("all-zero image: normalisation undefined (N == n)")
    x_bar = lam * float(x.sum()) / (n_total - n_zero)
    if x_bar <= 0:
        raise DegenerateInputError(f"non-positive threshold x_bar={x_bar}")
    out = 2.0 * x / x_bar - 1.0
    out[x <= 0.0] = -1.0
    out[x >= x_bar] = 1.0
    params = NormalizationParams(lam=float(lam), x_bar=x_bar,
                                 n_total=n_total, n_zero=n_zero)
    return out.astype(np.float32), params


def normalize_channels(pixels, lam=DEFAULT_LAMBDA):
    """Apply :func:`normalize_sar` independently per channel of (H, W, C)."""
    px = np.asarray(pixels)
    if px.ndim == 2:
        px = px[:, :, None]
    out = np.empty_like(px, dtype=np.float32)
    params = []
    for c in range(px.shape[2]):
        out[:, :, c], p = normalize_sar(px[:, :, c], lam)
        params.append(p)
    return out, params
