"""Weight initialisation helpers."""

import numpy as np


def truncated_normal(rng, shape, std, mean=0.0):
    """Normal(mean, std) with draws beyond two standard deviations redrawn."""
    if rng is None:
        rng = np.random.default_rng()
    out = rng.normal(0.0, std, size=shape)
    bad = np.abs(out) > 2.0 * std
    while bad.any():
        out[bad] = rng.normal(0.0, std, size=int(bad.sum()))
        bad = np.abs(out) > 2.0 * std
    return out + mean
