"""Layer bookkeeping: receptive fields, parameter and FLOP accounting.

Every network exposes a layer table built from :class:`LayerInfo`
rows; the table is the single source of truth for layer counts,
channel widths, receptive field, and parameter totals.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LayerInfo:
    name: str
    kind: str              # "conv" | "tconv"
    kernel: int
    stride: int
    in_channels: int
    out_channels: int
    has_bn: bool
    has_bias: bool
    activation: str        # "lrelu" | "tanh" | "sigmoid" | "-"
    group: str             # "encoder" | "bottleneck" | "upsample" | "decoder" | "body"
    counted: bool          # participates in the quoted layer count

    @property
    def kernel_params(self) -> int:
        return self.kernel * self.kernel * self.in_channels * self.out_channels

    @property
    def conv_params(self) -> int:
        return self.kernel_params + (self.out_channels if self.has_bias else 0)

    @property
    def norm_params(self) -> int:
        return 2 * self.out_channels if self.has_bn else 0

    def flops(self, out_h, out_w) -> int:
        """Multiply-add convention: 2 * k^2 * C_in * C_out per output element.

        For transposed convolutions the "output" grid in this count is
        the layer's input grid (each input element touches k^2 weights).
        """
        return 2 * self.kernel * self.kernel * self.in_channels * self.out_channels * out_h * out_w


def receptive_field(layers) -> int:
    """Textbook receptive field of a stack of (kernel, stride) layers."""
    rf, jump = 1, 1
    for kernel, stride in layers:
        rf += (kernel - 1) * jump
        jump *= stride
    return rf


def param_totals(table) -> dict:
    """Aggregate parameter counts over a layer table."""
    conv_kernels = sum(r.kernel_params for r in table)
    conv = sum(r.conv_params for r in table)
    norm = sum(r.norm_params for r in table)
    return {
        "conv_kernel_params": conv_kernels,
        "conv_params": conv,
        "norm_params": norm,
        "total_params": conv + norm,
    }


def format_table(table, title="") -> str:
    lines = []
    if title:
        lines.append(title)
    header = (f"{'name':<12}{'kind':<7}{'k':>3}{'s':>3}{'in':>6}{'out':>6}"
              f"{'bn':>4}{'act':>9}{'group':<12}{'counted':>8}{'params':>12}")
    lines.append(header)
    lines.append("-" * len(header))
    for r in table:
        lines.append(
            f"{r.name:<12}{r.kind:<7}{r.kernel:>3}{r.stride:>3}{r.in_channels:>6}"
            f"{r.out_channels:>6}{'y' if r.has_bn else '-':>4}{r.activation:>9}"
            f"  {r.group:<12}{'y' if r.counted else '-':>6}"
            f"{r.conv_params + r.norm_params:>12}")
    return "\n".join(lines)
