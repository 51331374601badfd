"""Parameter-holding layers on top of the functional ops."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from . import functional as F
from .autograd import Parameter
from .init import truncated_normal

INIT_STD = 0.02  # weights drawn from truncated normal(0, 0.02)


class Module:
    """Tiny module system: parameter/buffer registry plus train/eval mode.

    Assigning a Parameter, Module, or (via ``register_buffer``) ndarray
    attribute registers it; ``state_dict`` flattens everything under
    slash-separated paths, which is also the checkpoint key scheme.
    """

    def __init__(self):
        object.__setattr__(self, "_params", OrderedDict())
        object.__setattr__(self, "_buffers", OrderedDict())
        object.__setattr__(self, "_modules", OrderedDict())
        object.__setattr__(self, "training", True)

    def __setattr__(self, name, value):
        if isinstance(value, Parameter):
            self._params[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def register_buffer(self, name, array):
        self._buffers[name] = array
        object.__setattr__(self, name, array)

    # -- traversal ----------------------------------------------------------

    def named_parameters(self, prefix=""):
        for name, p in self._params.items():
            yield prefix + name, p
        for name, m in self._modules.items():
            yield from m.named_parameters(prefix + name + "/")

    def parameters(self):
        for _, p in self.named_parameters():
            yield p

    def named_buffers(self, prefix=""):
        for name, b in self._buffers.items():
            yield prefix + name, b
        for name, m in self._modules.items():
            yield from m.named_buffers(prefix + name + "/")

    def modules(self):
        yield self
        for m in self._modules.values():
            yield from m.modules()

    # -- state --------------------------------------------------------------

    def state_dict(self):
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        state.update({name: b.copy() for name, b in self.named_buffers()})
        return state

    def load_state_dict(self, state):
        own = dict(self.named_parameters())
        bufs = dict(self.named_buffers())
        missing = (set(own) | set(bufs)) - set(state)
        if missing:
            raise KeyError(f"checkpoint missing keys: {sorted(missing)[:5]} ...")
        for name, p in own.items():
            if p.data.shape != state[name].shape:
                raise ValueError(f"shape mismatch for {name}: "
                                 f"{p.data.shape} vs {state[name].shape}")
            p.data = state[name].astype(p.data.dtype, copy=True)
        for name, b in bufs.items():
            b[...] = state[name]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def train(self, mode=True):
        for m in self.modules():
            object.__setattr__(m, "training", mode)
        return self

    def eval(self):
        return self.train(False)

    def set_update_running_stats(self, flag):
        """Freeze/unfreeze running-statistics updates in all BN layers."""
        for m in self.modules():
            if isinstance(m, BatchNorm2d):
                m.update_running = flag

    def param_count(self):
        return sum(p.data.size for p in self.parameters())


class Conv2d(Module):
    def __init__(self, in_channels, out_channels, kernel_size, stride=1,
                 padding=0, bias=True, rng=None, dtype=np.float32):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding
        shape = (out_channels, in_channels, kernel_size, kernel_size)
        self.weight = Parameter(truncated_normal(rng, shape, INIT_STD).astype(dtype))
        self.bias = Parameter(np.zeros(out_channels, dtype=dtype)) if bias else None

    def forward(self, x):
        return F.conv2d(x, self.weight, self.bias, self.stride, self.padding)

    __call__ = forward


class ConvTranspose2d(Module):
    def __init__(self, in_channels, out_channels, kernel_size, stride=2,
                 padding=1, output_padding=1, bias=True, rng=None, dtype=np.float32):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding
        self.output_padding = output_padding
        shape = (in_channels, out_channels, kernel_size, kernel_size)
        self.weight = Parameter(truncated_normal(rng, shape, INIT_STD).astype(dtype))
        self.bias = Parameter(np.zeros(out_channels, dtype=dtype)) if bias else None

    def forward(self, x):
        return F.conv_transpose2d(x, self.weight, self.bias, self.stride,
                                  self.padding, self.output_padding)

    __call__ = forward


class BatchNorm2d(Module):
    """Batch normalisation over (N, H, W) per channel.

    With batch size 1 the batch statistics reduce to per-sample
    (instance-style) statistics, which is the training regime here.
    Inference uses the running averages, keeping the network fully
    convolutional (output independent of image extent).
    """

    def __init__(self, channels, momentum=0.1, eps=1e-5, rng=None, dtype=np.float32):
        super().__init__()
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.update_running = True
        # Affine scale starts near 1 (narrow truncated normal around it);
        # starting at exactly trunc_normal(0, 0.02) would kill the signal.
        gamma = 1.0 + truncated_normal(rng, (channels,), INIT_STD)
        self.gamma = Parameter(gamma.astype(dtype))
        self.beta = Parameter(np.zeros(channels, dtype=dtype))
        self.register_buffer("running_mean", np.zeros(channels, dtype=dtype))
        self.register_buffer("running_var", np.ones(channels, dtype=dtype))

    def forward(self, x):
        return F.batch_norm(x, self.gamma, self.beta,
                            self.running_mean, self.running_var,
                            self.training, self.momentum, self.eps,
                            self.update_running)

    __call__ = forward
