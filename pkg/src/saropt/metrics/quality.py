"""Pixel-level similarity metrics (PSNR, SSIM).

Both metrics operate on the [0, 1] rescaling of [-1, 1] images, so
the dynamic range is 1.  SSIM follows the standard windowed
definition: 11x11 Gaussian window (sigma 1.5), stabilisers
k1 = 0.01 and k2 = 0.03, local statistics over valid windows only,
averaged over channels.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _to_unit_interval(img):
    return (np.asarray(img, dtype=np.float64) + 1.0) / 2.0


def psnr(reference, candidate) -> float:
    """10 log10(1 / MSE) in dB; identical images report the 99 dB cap."""
    reference, candidate = np.asarray(reference), np.asarray(candidate)
    if reference.shape != candidate.shape:
        raise ValidationError(
            f"shape mismatch: {reference.shape} vs {candidate.shape}")
    a = _to_unit_interval(reference)
    b = _to_unit_interval(candidate)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP_DB)


def gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    win = np.outer(g, g)
    return win / win.sum()


def _window_mean(img, window):
    view = np.lib.stride_tricks.sliding_window_view(img, window.shape)
    return np.einsum("ijkl,kl->ij", view, window)


def ssim(reference, candidate, window_size=SSIM_WINDOW, sigma=SSIM_SIGMA) -> float:
    reference, candidate = np.asarray(reference), np.asarray(candidate)
    if reference.shape != candidate.shape:
        raise ValidationError(
            f"shape mismatch: {reference.shape} vs {candidate.shape}")
    a = _to_unit_interval(reference)
    b = _to_unit_interval(candidate)
    if a.ndim == 2:
        a, b = a[:, :, None], b[:, :, None]
    h, w, channels = a.shape
    if h < window_size or w < window_size:
        raise ValidationError(
            f"image {h}x{w} smaller than the {window_size}x{window_size} window")
    win = gaussian_window(window_size, sigma)
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    values = []
    for ch in range(channels):
        x, y = a[:, :, ch], b[:, :, ch]
        mu_x = _window_mean(x, win)
        mu_y = _window_mean(y, win)
        var_x = _window_mean(x * x, win) - mu_x ** 2
        var_y = _window_mean(y * y, win) - mu_y ** 2
        cov = _window_mean(x * y, win) - mu_x * mu_y
        num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
        den = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
        values.append(np.mean(num / den))
    return float(np.mean(values))
