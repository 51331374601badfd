"""Raster containers and file I/O.

Co-registration is assumed done upstream: a SAR raster and an optical
raster fed to the pipeline must already cover the same footprint on
the same grid.  Readers are deliberately thin: npy/npz always work,
PNG-family via Pillow and TIFF via tifffile when those are installed.
"""

from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, ValidationError


@dataclass
class RasterImage:
    pixels: np.ndarray          # (H, W, C) float array
    source_tag: str = "raster"

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3:
            raise ValidationError(f"raster must be HxWxC, got shape {px.shape}")
        if not np.isfinite(px).all():
            raise ValidationError("raster contains non-finite pixels")
        self.pixels = px.astype(np.float32, copy=False)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def channels(self):
        return self.pixels.shape[2]


def read_raster(path, source_tag=None) -> RasterImage:
    path = Path(path)
    tag = source_tag or path.stem
    if not path.exists():
        raise DataError(f"raster not found: {path}")
    suffix = path.suffix.lower()
    if suffix in (".npy", ".npz"):
        arr = np.load(path)
        if isinstance(arr, np.lib.npyio.NpzFile):
            arr = arr[arr.files[0]]
    elif suffix in (".png", ".jpg", ".jpeg", ".bmp"):
        try:
            from PIL import Image
        except ImportError as e:
            raise DataError(f"Pillow needed to read {path}") from e
        arr = np.asarray(Image.open(path))
    elif suffix in (".tif", ".tiff"):
        try:
            import tifffile
        except ImportError as e:
            raise DataError(f"tifffile needed to read {path}") from e
        arr = tifffile.imread(path)
    else:
        raise DataError(f"unsupported raster format: {path}")
    return RasterImage(np.asarray(arr, dtype=np.float32), source_tag=tag)


def write_raster(path, array):
    """Write float data as .npy, or an 8-bit preview for image suffixes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        np.save(path, np.asarray(array, dtype=np.float32))
    elif suffix in (".png", ".jpg", ".jpeg", ".bmp"):
        try:
            from PIL import Image
        except ImportError as e:
            raise DataError(f"Pillow needed to write {path}") from e
        img = unit_to_uint8(np.asarray(array))
        if img.shape[-1] == 1:
            img = img[:, :, 0]
        Image.fromarray(img).save(path)
    else:
        raise DataError(f"unsupported output format: {path}")


def optical_to_unit(arr) -> np.ndarray:
    """Map native [0, 255] optical values linearly to [-1, 1]."""
    return np.asarray(arr, dtype=np.float32) / 127.5 - 1.0


def unit_to_uint8(arr) -> np.ndarray:
    """[-1, 1] float to [0, 255] uint8 preview."""
    return np.clip((np.asarray(arr) + 1.0) * 127.5, 0, 255).round().astype(np.uint8)


def run_despeckle(raster: RasterImage, command) -> RasterImage:
    """Optional pre-processing hook delegating to an external filter.

    ``command`` is a template such as ``mydespeckler {input} {output}``;
    the exchange format is .npy on both sides.  No command means
    pass-through: the filtering algorithm itself is out of scope.
    """
    if not command:
        return raster
    with tempfile.TemporaryDirectory(prefix="saropt_despeckle_") as tmp:
        src = Path(tmp) / "in.npy"
        dst = Path(tmp) / "out.npy"
        np.save(src, raster.pixels)
        cmd = command.format(input=str(src), output=str(dst))
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
        if proc.returncode != 0 or not dst.exists():
            raise DataError(
                f"despeckle command failed ({proc.returncode}): {proc.stderr.strip()}")
        return RasterImage(np.load(dst), source_tag=raster.source_tag)
