"""Patch-based convolutional critic.

Five 4x4 convolutions score an image as a grid of real/fake
probabilities; with the default stride schedule [2, 2, 2, 1, 1] a
256x256 input yields a 32x32 map and each output value covers a 70x70
input patch.  The critic sees only the candidate image (no source
image concatenated); channel count is config-driven.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError
from ..nn.autograd import Tensor
from ..nn.modules import Module
from .accounting import LayerInfo, format_table, param_totals, receptive_field
from .translator import ConvBlock


@dataclass(frozen=True)
class DiscriminatorConfig:
    in_channels: int = 3
    kernel_size: int = 4
    channel_schedule: tuple = (64, 128, 256, 512, 1)
    stride_schedule: tuple = (2, 2, 2, 1, 1)

    def validate(self):
        if len(self.channel_schedule) != len(self.stride_schedule):
            raise ConfigError("channel and stride schedules differ in length")
        if len(self.channel_schedule) != 5:
            raise ConfigError("the patch critic has exactly 5 layers")
        if self.channel_schedule[-1] != 1:
            raise ConfigError("last layer must produce a single probability channel")
        if any(s not in (1, 2) for s in self.stride_schedule):
            raise ConfigError("strides must be 1 or 2")
        return self


class PatchDiscriminator(Module):
    def __init__(self, config: DiscriminatorConfig, rng=None, dtype=np.float32):
        super().__init__()
        config.validate()
        self.config = config
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        k = config.kernel_size
        channels = [config.in_channels, *config.channel_schedule]
        n = len(config.stride_schedule)
        self.layer_names = []
        for i, stride in enumerate(config.stride_schedule):
            first, last = i == 0, i == n - 1
            # stride-1 4x4 layers keep the grid size with (1, 2) padding;
            # stride-2 layers halve it with symmetric padding 1
            padding = (1, 1, 1, 1) if stride == 2 else (1, 2, 1, 2)
            blk = ConvBlock(
                "conv", channels[i], channels[i + 1], k, stride, padding,
                bn=not (first or last),
                act="sigmoid" if last else "lrelu",
                rng=rng, dtype=dtype)
            name = f"c{i + 1}"
            setattr(self, name, blk)
            self.layer_names.append(name)

    def forward(self, x):
        if not isinstance(x, Tensor):
            x = Tensor(x)
        if x.shape[1] != self.config.in_channels:
            raise ShapeError(f"expected {self.config.in_channels} channels, "
                             f"got {x.shape[1]}")
        h = x
        for name in self.layer_names:
            h = getattr(self, name)(h)
        return h

    __call__ = forward

    def layer_table(self):
        rows = []
        for name in self.layer_names:
            blk = getattr(self, name)
            op = blk.op
            rows.append(LayerInfo(
                name=name, kind="conv", kernel=op.kernel_size, stride=op.stride,
                in_channels=op.in_channels, out_channels=op.out_channels,
                has_bn=blk.bn is not None, has_bias=op.bias is not None,
                activation=blk.act, group="body", counted=True))
        return rows

    def receptive_field(self) -> int:
        return receptive_field((r.kernel, r.stride) for r in self.layer_table())

    def param_counts(self) -> dict:
        return param_totals(self.layer_table())

    def output_size(self, size: int) -> int:
        """Probability-map edge length for a ``size`` x ``size`` input."""
        for stride in self.config.stride_schedule:
            pad = 2 if stride == 2 else 3
            size = (size + pad - self.config.kernel_size) // stride + 1
        return size

    def summary(self) -> str:
        totals = self.param_counts()
        return (format_table(self.layer_table(), f"discriminator {self.config}")
                + f"\nlayers: {len(self.layer_names)}"
                + f"\nreceptive field: {self.receptive_field()}"
                + f"\nconv params: {totals['conv_params']}"
                + f"\ntotal trainable params: {totals['total_params']}")


def build_discriminator(config: DiscriminatorConfig, init_seed=None,
                        dtype=np.float32) -> PatchDiscriminator:
    rng = np.random.default_rng(init_seed)
    return PatchDiscriminator(config, rng=rng, dtype=dtype)
