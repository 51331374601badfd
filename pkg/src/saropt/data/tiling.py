"""Non-overlapping tiling of large rasters into training patches.

Patches never overlap (no shared pixels between train and test) and
margins that do not fill a whole tile are dropped.  Tile coordinates
are recorded so a cropped region can be reassembled exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .raster import RasterImage

PATCH_SIZE = 256


@dataclass
class Tile:
    row: int
    col: int
    y0: int
    x0: int
    pixels: np.ndarray   # (size, size, C)
    patch_id: str


def tile(raster: RasterImage, size: int = PATCH_SIZE):
    """Split into floor(H/size) * floor(W/size) non-overlapping tiles."""
    if size < 1:
        raise ValidationError(f"tile size must be positive, got {size}")
    h, w = raster.height, raster.width
    if h < size or w < size:
        raise ValidationError(
            f"raster {h}x{w} smaller than one {size}x{size} tile")
    tiles = []
    for row in range(h // size):
        for col in range(w // size):
            y0, x0 = row * size, col * size
            tiles.append(Tile(
                row=row, col=col, y0=y0, x0=x0,
                pixels=raster.pixels[y0:y0 + size, x0:x0 + size],
                patch_id=f"{raster.source_tag}_r{row:04d}_c{col:04d}"))
    return tiles


def untile(tiles, size=None):
    """Reassemble tiles at their recorded coordinates (inverse of tile)."""
    if not tiles:
        raise ValidationError("no tiles to assemble")
    size = size or tiles[0].pixels.shape[0]
    rows = max(t.row for t in tiles) + 1
    cols = max(t.col for t in tiles) + 1
    channels = tiles[0].pixels.shape[2]
    out = np.zeros((rows * size, cols * size, channels),
                   dtype=tiles[0].pixels.dtype)
    for t in tiles:
        out[t.row * size:(t.row + 1) * size,
            t.col * size:(t.col + 1) * size] = t.pixels
    return out
