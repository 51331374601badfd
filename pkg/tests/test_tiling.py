"""Tiling arithmetic and exact reassembly."""

import numpy as np
import pytest

from saropt.data import RasterImage, tile, untile
from saropt.errors import ValidationError


def _raster(h, w, c=1, seed=0):
    rng = np.random.default_rng(seed)
    return RasterImage(rng.uniform(-1, 1, (h, w, c)).astype(np.float32), "t")


def test_512_by_768_gives_six_tiles():
    tiles = tile(_raster(512, 768), size=256)
    assert len(tiles) == 6


def test_single_tile_is_identity():
    r = _raster(256, 256, c=3)
    tiles = tile(r, size=256)
    assert len(tiles) == 1
    assert np.array_equal(tiles[0].pixels, r.pixels)


def test_margins_dropped():
    tiles = tile(_raster(300, 300), size=256)
    assert len(tiles) == 1
    assert tiles[0].pixels.shape == (256, 256, 1)


def test_raster_smaller_than_tile_rejected():
    with pytest.raises(ValidationError):
        tile(_raster(100, 300), size=256)


def test_patch_ids_encode_coordinates():
    tiles = tile(_raster(64, 96), size=32)
    ids = {t.patch_id for t in tiles}
    assert len(ids) == 6
    assert all(id_.startswith("t_r") and "_c" in id_ for id_ in ids)


def test_untile_reproduces_cropped_region_exactly():
    r = _raster(300, 520, c=3, seed=5)
    size = 128
    tiles = tile(r, size=size)
    rebuilt = untile(tiles, size=size)
    rows, cols = 300 // size, 520 // size
    assert rebuilt.shape == (rows * size, cols * size, 3)
    assert np.array_equal(rebuilt, r.pixels[:rows * size, :cols * size])
