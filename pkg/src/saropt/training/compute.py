"""Parameter / FLOP accounting and throughput measurement.

Only convolutional layers are counted (normalisation and activations
are ignored, matching the usual convention for these models).  The
FLOP estimate is 2 * k^2 * C_in * C_out * H * W per layer, where H x W
is the output grid for convolutions and the input grid for transposed
convolutions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..nn import no_grad
from ..nn.autograd import Tensor


@dataclass
class ComputeReport:
    param_counts: dict            # name -> {"conv_params", "total_params"}
    flops: dict                   # name -> per-sample forward FLOPs
    image_size: int
    num_replicas: int = 1
    samples_per_second: float = None

    @property
    def translator_pair_conv_params(self):
        return sum(v["conv_params"] for k, v in self.param_counts.items()
                   if k.startswith("translator"))

    @property
    def discriminator_pair_conv_params(self):
        return sum(v["conv_params"] for k, v in self.param_counts.items()
                   if k.startswith("discriminator"))

    def format(self) -> str:
        lines = [f"compute report ({self.image_size}x{self.image_size} samples, "
                 f"{self.num_replicas} replica(s))"]
        for name in sorted(self.param_counts):
            pc = self.param_counts[name]
            lines.append(f"  {name:<16} conv params {pc['conv_params']:>12,}  "
                         f"total {pc['total_params']:>12,}  "
                         f"forward FLOPs {self.flops[name]:>16,}")
        lines.append(f"  translator pair conv params: "
                     f"{self.translator_pair_conv_params:,}")
        lines.append(f"  discriminator pair conv params: "
                     f"{self.discriminator_pair_conv_params:,}")
        if self.samples_per_second is not None:
            lines.append(f"  throughput: {self.samples_per_second:.3f} samples/s")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "image_size": self.image_size,
            "num_replicas": self.num_replicas,
            "samples_per_second": self.samples_per_second,
            "param_counts": self.param_counts,
            "flops": self.flops,
        }


def flop_estimate(net, size: int) -> int:
    """Per-sample forward FLOPs for a network exposing ``layer_table()``."""
    total = 0
    res = size
    for row in net.layer_table():
        if row.kind == "tconv":
            total += row.flops(res, res)
            res *= row.stride
        else:
            out = res // row.stride if row.stride > 1 else res
            total += row.flops(out, out)
            res = out
    return total


def measure_throughput(net, size, n_samples=3, in_channels=None):
    """Eval-mode forward throughput in samples/second."""
    c = in_channels or net.config.in_channels
    x = np.zeros((1, c, size, size), dtype=np.float32)
    net.eval()
    with no_grad():
        net(Tensor(x))  # warm up
        t0 = time.perf_counter()
        for _ in range(n_samples):
            net(Tensor(x))
        dt = time.perf_counter() - t0
    return n_samples / dt if dt > 0 else float("inf")


def compute_report(translators, discriminators, image_size=256,
                   num_replicas=1, throughput_net=None) -> ComputeReport:
    """Account for a set of networks; names follow insertion order."""
    params, flops = {}, {}
    for i, net in enumerate(translators):
        name = f"translator_{chr(ord('a') + i)}"
        pc = net.param_counts()
        params[name] = {"conv_params": pc["conv_params"],
                        "total_params": pc["total_params"]}
        flops[name] = flop_estimate(net, image_size)
    for i, net in enumerate(discriminators):
        name = f"discriminator_{chr(ord('a') + i)}"
        pc = net.param_counts()
        params[name] = {"conv_params": pc["conv_params"],
                        "total_params": pc["total_params"]}
        flops[name] = flop_estimate(net, image_size)
    sps = None
    if throughput_net is not None:
        sps = measure_throughput(throughput_net, image_size)
    return ComputeReport(param_counts=params, flops=flops,
                         image_size=image_size, num_replicas=num_replicas,
                         samples_per_second=sps)
