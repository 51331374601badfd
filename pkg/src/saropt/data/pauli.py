"""Pauli decomposition of quad-pol scattering matrices.

Per pixel the Sinclair matrix (S_HH, S_HV, S_VH, S_VV) decomposes into
surface (a), dihedral (b), volumetric (c) and antisymmetric (d)
components:

    a = (S_HH + S_VV) / sqrt(2)      b = (S_HH - S_VV) / sqrt(2)
    c = (S_HV + S_VH) / sqrt(2)      d = j (S_HV - S_VH) / sqrt(2)

The pseudo-colour intensity coding keeps three of them:

    I = [ |S_HH - S_VV|^2, 4 |S_HV|^2, |S_HH + S_VV|^2 ] / 2

as (R, G, B), each channel then normalised like a SAR amplitude image
so full-pol data can stand in for the single-pol input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .normalize import DEFAULT_LAMBDA, normalize_sar
from .raster import RasterImage

_SQRT2 = np.sqrt(2.0)


@dataclass
class ScatteringMatrix:
    s_hh: np.ndarray
    s_hv: np.ndarray
    s_vh: np.ndarray
    s_vv: np.ndarray

    def __post_init__(self):
        chans = [np.asarray(c, dtype=np.complex128)
                 for c in (self.s_hh, self.s_hv, self.s_vh, self.s_vv)]
        shape = chans[0].shape
        for name, c in zip(("s_hh", "s_hv", "s_vh", "s_vv"), chans):
            if c.shape != shape:
                raise ValidationError(
                    f"channel {name} has shape {c.shape}, expected {shape}")
            if not np.isfinite(c).all():
                raise ValidationError(f"channel {name} contains non-finite values")
        self.s_hh, self.s_hv, self.s_vh, self.s_vv = chans


@dataclass
class PauliComponents:
    a: np.ndarray   # surface (single bounce)
    b: np.ndarray   # dihedral
    c: np.ndarray   # volumetric
    d: np.ndarray   # antisymmetric


def pauli_components(s: ScatteringMatrix) -> PauliComponents:
    return PauliComponents(
        a=(s.s_hh + s.s_vv) / _SQRT2,
        b=(s.s_hh - s.s_vv) / _SQRT2,
        c=(s.s_hv + s.s_vh) / _SQRT2,
        d=1j * (s.s_hv - s.s_vh) / _SQRT2,
    )


def pauli_intensities(s: ScatteringMatrix) -> np.ndarray:
    """Raw (H, W, 3) channel intensities before normalisation."""
    red = np.abs(s.s_hh - s.s_vv) ** 2
    green = 4.0 * np.abs(s.s_hv) ** 2
    blue = np.abs(s.s_hh + s.s_vv) ** 2
    return np.stack([red, green, blue], axis=-1) / 2.0


def pauli_rgb(s: ScatteringMatrix, lam=DEFAULT_LAMBDA, source_tag="pauli"):
    """Pseudo-colour image in [-1, 1]; returns (RasterImage, per-channel params)."""
    intensities = pauli_intensities(s)
    out = np.empty(intensities.shape, dtype=np.float32)
    params = []
    for ch in range(3):
        out[:, :, ch], p = normalize_sar(intensities[:, :, ch], lam)
        params.append(p)
    return RasterImage(out, source_tag=source_tag), params
