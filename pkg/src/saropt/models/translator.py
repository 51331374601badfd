"""Cascade-residual encoder-decoder translator.

The generator maps one imaging modality to the other through a
multiscale convolutional encoder/decoder.  Two design traits set it
apart from a plain U-Net:

* encoder feature maps are concatenated into the decoder at every
  scale (skip links), and
* the raw input image, average-pooled to each decoder resolution, is
  concatenated again before the second deconvolution of every scale
  (the cascaded residual), so every decoder stage sees the source
  image directly.

Layer schedule (source of truth: ``layer_table()``; the default
config prints 12 counted encoder convolutions, 12 counted decoder
convolutions, receptive field 191, ~51.9M conv parameters).

  encoder   scale 1:  e1a  conv3 s1  in->F          (no BN, bias)
                      e1b  conv3 s1  F->F
            scale s:  e{s}a conv3 s2  (enters scale s, halves the grid)
                      e{s}b conv3 s1  (widens: F doubles per scale, capped 16F)
            latent:   bottleneck conv3 s2 (not in the quoted 12; the
                      count convention is documented here and audited
                      by the table)
  decoder   scale s:  u{s}  tconv3 s2 (upsample entry)
                      d{s}a conv3 s1 after skip concat
                      d{s}b conv3 s1 after residual concat
            d1b maps to out_channels through tanh (no BN, bias).

The quoted receptive field is the textbook receptive field of the 12
counted encoder layers on the input image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError
from ..nn import functional as F
from ..nn.autograd import Tensor
from ..nn.modules import BatchNorm2d, Conv2d, ConvTranspose2d, Module
from .accounting import LayerInfo, format_table, param_totals, receptive_field

WIDTH_CAP_FACTOR = 16  # feature maps stop doubling at 16x base (800 for base 50)


@dataclass(frozen=True)
class TranslatorConfig:
    in_channels: int = 1
    out_channels: int = 3
    base_feature_maps: int = 50
    num_scales: int = 6
    kernel_size: int = 3
    input_size: int = 256

    def validate(self):
        if self.base_feature_maps < 1:
            raise ConfigError("base_feature_maps must be >= 1")
        if self.num_scales < 1:
            raise ConfigError("num_scales must be >= 1")
        if self.kernel_size % 2 != 1:
            raise ConfigError("kernel_size must be odd")
        if self.input_size % (2 ** self.num_scales) != 0:
            raise ConfigError(
                f"input_size {self.input_size} not divisible by "
                f"2^num_scales = {2 ** self.num_scales}")
        return self

    @property
    def divisor(self) -> int:
        return 2 ** self.num_scales

    def scale_width(self, s: int) -> int:
        """Encoder width after the refine conv of scale ``s`` (1-based)."""
        return min(self.base_feature_maps * 2 ** (s - 1),
                   self.base_feature_maps * WIDTH_CAP_FACTOR)

    def decoder_width(self, s: int) -> int:
        """Deconv output width at decoder scale ``s``."""
        return self.base_feature_maps if s == 1 else self.scale_width(s - 1)

    def upsample_width(self, s: int) -> int:
        """Channel count produced by the upsample entry of decoder scale ``s``."""
        above = self.scale_width(self.num_scales) if s == self.num_scales \
            else self.decoder_width(s + 1)
        return max(above // 2, self.base_feature_maps)


class ConvBlock(Module):
    """conv/tconv -> (BN) -> activation."""

    def __init__(self, kind, in_ch, out_ch, kernel, stride, padding,
                 bn, act, rng, dtype):
        super().__init__()
        bias = not bn
        if kind == "conv":
            self.op = Conv2d(in_ch, out_ch, kernel, stride, padding,
                             bias=bias, rng=rng, dtype=dtype)
        else:
            self.op = ConvTranspose2d(in_ch, out_ch, kernel, stride,
                                      padding=1, output_padding=1,
                                      bias=bias, rng=rng, dtype=dtype)
        self.bn = BatchNorm2d(out_ch, rng=rng, dtype=dtype) if bn else None
        self.act = act

    def forward(self, x):
        h = self.op(x)
        if self.bn is not None:
            h = self.bn(h)
        if self.act == "lrelu":
            return F.leaky_relu(h, 0.2)
        if self.act == "tanh":
            return F.tanh(h)
        if self.act == "sigmoid":
            return F.sigmoid(h)
        return h

    __call__ = forward


class Translator(Module):
    """One direction of the reciprocal translation pair."""

    def __init__(self, config: TranslatorConfig, rng=None, dtype=np.float32):
        super().__init__()
        config.validate()
        self.config = config
        cfg = config
        k = cfg.kernel_size
        pad = (k - 1) // 2
        S = cfg.num_scales
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng

        def block(name, kind, cin, cout, stride, bn=True, act="lrelu"):
            blk = ConvBlock(kind, cin, cout, k, stride, pad, bn, act, rng, dtype)
            setattr(self, name, blk)
            return blk

        # encoder
        block("e1a", "conv", cfg.in_channels, cfg.scale_width(1), 1, bn=False)
        block("e1b", "conv", cfg.scale_width(1), cfg.scale_width(1), 1)
        for s in range(2, S + 1):
            prev = cfg.scale_width(s - 1)
            block(f"e{s}a", "conv", prev, prev, 2)
            block(f"e{s}b", "conv", prev, cfg.scale_width(s), 1)
        block("bottleneck", "conv", cfg.scale_width(S), cfg.scale_width(S), 2)

        # decoder
        for s in range(S, 0, -1):
            prev = cfg.scale_width(S) if s == S else cfg.decoder_width(s + 1)
            up = cfg.upsample_width(s)
            v = cfg.decoder_width(s)
            block(f"u{s}", "tconv", prev, up, 2)
            block(f"d{s}a", "conv", cfg.scale_width(s) + up, v, 1)
            if s == 1:
                block("d1b", "conv", v + cfg.in_channels, cfg.out_channels, 1,
                      bn=False, act="tanh")
            else:
                block(f"d{s}b", "conv", v + cfg.in_channels, v, 1)

    # -- inference / training graph -----------------------------------------

    def forward(self, x):
        if not isinstance(x, Tensor):
            x = Tensor(x)
        cfg = self.config
        n, c, h, w = x.shape
        if c != cfg.in_channels:
            raise ShapeError(f"expected {cfg.in_channels} input channels, got {c}")
        d = cfg.divisor
        if h % d or w % d:
            raise ShapeError(
                f"spatial size {h}x{w} must be a multiple of {d} "
                f"(2^num_scales); pad or crop the raster first")
        skips = []
        hid = self.e1b(self.e1a(x))
        skips.append(hid)
        for s in range(2, cfg.num_scales + 1):
            hid = getattr(self, f"e{s}b")(getattr(self, f"e{s}a")(hid))
            skips.append(hid)
        hid = self.bottleneck(hid)
        for s in range(cfg.num_scales, 0, -1):
            hid = getattr(self, f"u{s}")(hid)
            hid = F.concat([hid, skips[s - 1]])
            hid = getattr(self, f"d{s}a")(hid)
            residual = F.avg_pool2d(x, 2 ** (s - 1))
            hid = F.concat([hid, residual])
            hid = getattr(self, f"d{s}b")(hid)
        return hid

    __call__ = forward

    # -- introspection -------------------------------------------------------

    def layer_table(self):
        rows = []
        cfg = self.config
        S = cfg.num_scales
        order = ["e1a", "e1b"]
        order += [f"e{s}{t}" for s in range(2, S + 1) for t in "ab"]
        order += ["bottleneck"]
        for s in range(S, 0, -1):
            order += [f"u{s}", f"d{s}a", f"d{s}b"]
        for name in order:
            blk = getattr(self, name)
            op = blk.op
            kind = "tconv" if isinstance(op, ConvTranspose2d) else "conv"
            if name.startswith("e"):
                group, counted = "encoder", True
            elif name == "bottleneck":
                group, counted = "bottleneck", False
            elif name.startswith("u"):
                group, counted = "upsample", False
            else:
                group, counted = "decoder", True
            rows.append(LayerInfo(
                name=name, kind=kind, kernel=op.kernel_size, stride=op.stride,
                in_channels=op.in_channels, out_channels=op.out_channels,
                has_bn=blk.bn is not None, has_bias=op.bias is not None,
                activation=blk.act or "-", group=group, counted=counted))
        return rows

    def encoder_layers(self):
        return [r for r in self.layer_table() if r.group == "encoder" and r.counted]

    def decoder_layers(self):
        return [r for r in self.layer_table() if r.group == "decoder" and r.counted]

    def receptive_field(self) -> int:
        return receptive_field((r.kernel, r.stride) for r in self.encoder_layers())

    def param_counts(self) -> dict:
        return param_totals(self.layer_table())

    def summary(self) -> str:
        t = self.layer_table()
        totals = self.param_counts()
        head = format_table(t, title=f"translator {self.config}")
        tail = (f"\nencoder layers (counted): {len(self.encoder_layers())}"
                f"\ndecoder layers (counted): {len(self.decoder_layers())}"
                f"\nreceptive field (encoder): {self.receptive_field()}"
                f"\nconv params: {totals['conv_params']}"
                f"\ntotal trainable params: {totals['total_params']}")
        return head + tail


def build_translator(config: TranslatorConfig, init_seed=None,
                     dtype=np.float32) -> Translator:
    """Deterministically initialised translator (same seed, same weights)."""
    rng = np.random.default_rng(init_seed)
    return Translator(config, rng=rng, dtype=dtype)
