"""Pluggable image embedders for distribution-level evaluation.

Distances between embedded sample sets are only comparable within one
embedder, so every report records the embedder identity string.  The
reference configuration would use a large pretrained perceptual
network (2048-d pool features); since those weights cannot be assumed
present, the default is a fixed-seed random linear projection whose
pushforward statistics are analytically checkable, and any linear
embedding saved as .npz can be plugged in via ``load_embedder``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError, ValidationError

DEFAULT_DIM = 16
DEFAULT_INPUT_SHAPE = (64, 64, 3)


def resize_bilinear(img, out_h, out_w):
    """Plain bilinear resampling of (H, W, C) with edge clamping."""
    h, w, _ = img.shape
    if (h, w) == (out_h, out_w):
        return img
    ys = (np.arange(out_h) + 0.5) * h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * w / out_w - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :, None]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def adapt_channels(img, channels):
    """Replicate a single channel up or average extras down."""
    c = img.shape[2]
    if c == channels:
        return img
    if c == 1:
        return np.repeat(img, channels, axis=2)
    if channels == 1:
        return img.mean(axis=2, keepdims=True)
    raise ValidationError(f"cannot adapt {c} channels to {channels}")


class RandomProjectionEmbedder:
    """Fixed random linear map: resize, flatten, project.

    Deterministic given (dim, seed, input_shape); the projection
    matrix is exposed so tests can push Gaussian statistics through
    it analytically.
    """

    def __init__(self, dim=DEFAULT_DIM, seed=0, input_shape=DEFAULT_INPUT_SHAPE):
        self.dim = dim
        self.seed = seed
        self.input_shape = tuple(input_shape)
        d_in = int(np.prod(self.input_shape))
        rng = np.random.default_rng(seed)
        self.projection = rng.normal(0.0, 1.0 / np.sqrt(d_in), (dim, d_in))
        h, w, c = self.input_shape
        self.identity = f"random-projection-d{dim}-seed{seed}-in{h}x{w}x{c}"

    def embed(self, images):
        h, w, c = self.input_shape
        out = np.empty((len(images), self.dim))
        for i, img in enumerate(images):
            img = np.asarray(img, dtype=np.float64)
            if img.ndim == 2:
                img = img[:, :, None]
            img = adapt_channels(img, c)
            img = resize_bilinear(img, h, w)
            out[i] = self.projection @ img.reshape(-1)
        return out


class LinearNpzEmbedder:
    """Linear embedder loaded from an .npz archive.

    Expects ``projection`` of shape (dim, H*W*C) and ``input_shape``
    of (H, W, C); this is the hook for externally supplied embedding
    weights.
    """

    def __init__(self, path):
        path = Path(path)
        if not path.exists():
            raise DataError(f"embedder weights not found: {path}")
        with np.load(path) as npz:
            self.projection = npz["projection"]
            self.input_shape = tuple(int(v) for v in npz["input_shape"])
        if self.projection.ndim != 2:
            raise DataError(f"projection in {path} must be 2-D")
        if self.projection.shape[1] != int(np.prod(self.input_shape)):
            raise DataError(f"projection/input_shape mismatch in {path}")
        self.dim = self.projection.shape[0]
        self.identity = f"linear-npz-{path.name}-d{self.dim}"

    def embed(self, images):
        h, w, c = self.input_shape
        out = np.empty((len(images), self.dim))
        for i, img in enumerate(images):
            img = np.asarray(img, dtype=np.float64)
            if img.ndim == 2:
                img = img[:, :, None]
            img = adapt_channels(img, c)
            img = resize_bilinear(img, h, w)
            out[i] = self.projection @ img.reshape(-1)
        return out


def load_embedder(spec="random"):
    """Parse an embedder spec: ``random[:dim[:seed]]`` or a .npz path."""
    if spec is None:
        spec = "random"
    if spec.startswith("random"):
        parts = spec.split(":")
        dim = int(parts[1]) if len(parts) > 1 else DEFAULT_DIM
        seed = int(parts[2]) if len(parts) > 2 else 0
        return RandomProjectionEmbedder(dim=dim, seed=seed)
    if spec.endswith(".npz"):
        return LinearNpzEmbedder(spec)
    raise ConfigError(f"unknown embedder spec: {spec!r}")
