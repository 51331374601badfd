"""Differentiable operations used by the translation networks.

All image tensors are NCHW.  Convolutions run per sample through the
im2col/col2im kernel backend (compiled or numpy, see
:mod:`saropt.nn.kernels`), with output-row chunking so the column
buffer stays bounded even for large rasters.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from . import kernels
from .autograd import Tensor, as_tensor, make_op

# Column-buffer budget per conv call, in elements.  69 rows of a
# 512-wide, 50-channel 3x3 layer fit comfortably.
_COL_BUDGET = 16_000_000


def _pair(v):
    return (v, v) if isinstance(v, int) else tuple(v)


def _quad(padding):
    """Normalise padding to (top, bottom, left, right)."""
    if isinstance(padding, int):
        return (padding, padding, padding, padding)
    p = tuple(padding)
    if len(p) == 2:
        return (p[0], p[0], p[1], p[1])
    if len(p) == 4:
        return p
    raise ValueError(f"bad padding spec: {padding!r}")


def conv_output_size(size, kernel, stride, pad_lo, pad_hi):
    return (size + pad_lo + pad_hi - kernel) // stride + 1


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def _conv2d_forward(x, w, b, stride, padding):
    n, cin, h, win = x.shape
    cout, cin_w, kh, kw = w.shape
    if cin != cin_w:
        raise ShapeError(f"conv2d: input has {cin} channels, weights expect {cin_w}")
    sh, sw = stride
    pt, pb, pl, pr = padding
    oh = conv_output_size(h, kh, sh, pt, pb)
    ow = conv_output_size(win, kw, sw, pl, pr)
    if oh <= 0 or ow <= 0:
        raise ShapeError(f"conv2d: {h}x{win} input too small for kernel {kh}x{kw}")
    w_mat = np.ascontiguousarray(w.reshape(cout, cin * kh * kw))
    out = np.empty((n, cout, oh, ow), dtype=x.dtype)
    ckk = cin * kh * kw
    rows = max(1, min(oh, _COL_BUDGET // (ckk * ow)))
    scratch = np.empty(ckk * rows * ow, dtype=x.dtype)
    for i in range(n):
        img = np.ascontiguousarray(x[i])
        for y0 in range(0, oh, rows):
            y1 = min(y0 + rows, oh)
            blk = scratch[: ckk * (y1 - y0) * ow].reshape(ckk, (y1 - y0) * ow)
            kernels.im2col(img, blk, kh, kw, sh, sw, pt - y0 * sh, pl, y1 - y0, ow)
            out[i, :, y0:y1] = (w_mat @ blk).reshape(cout, y1 - y0, ow)
    if b is not None:
        out += b.reshape(1, cout, 1, 1)
    return out


def _conv2d_backward(grad_out, x, w, stride, padding, need_x, need_w, need_b):
    n, cin, h, win = x.shape
    cout, _, kh, kw = w.shape
    sh, sw = stride
    pt, pb, pl, pr = padding
    oh, ow = grad_out.shape[2], grad_out.shape[3]
    w_mat = np.ascontiguousarray(w.reshape(cout, cin * kh * kw))
    gx = np.zeros_like(x) if need_x else None
    gw = np.zeros((cout, cin * kh * kw), dtype=w.dtype) if need_w else None
    gb = grad_out.sum(axis=(0, 2, 3)) if need_b else None
    ckk = cin * kh * kw
    rows = max(1, min(oh, _COL_BUDGET // (ckk * ow)))
    scratch = np.empty(ckk * rows * ow, dtype=x.dtype)
    for i in range(n):
        img = np.ascontiguousarray(x[i])
        for y0 in range(0, oh, rows):
            y1 = min(y0 + rows, oh)
            blk = scratch[: ckk * (y1 - y0) * ow].reshape(ckk, (y1 - y0) * ow)
            g_blk = np.ascontiguousarray(grad_out[i, :, y0:y1].reshape(cout, -1))
            if need_w:
                kernels.im2col(img, blk, kh, kw, sh, sw, pt - y0 * sh, pl, y1 - y0, ow)
                gw += g_blk @ blk.T
            if need_x:
                np.matmul(w_mat.T, g_blk, out=blk)
                kernels.col2im(blk, gx[i], kh, kw, sh, sw, pt - y0 * sh, pl, y1 - y0, ow)
    if need_w:
        gw = gw.reshape(w.shape)
    return gx, gw, gb


def conv2d(x, w, b=None, stride=1, padding=0):
    x, w = as_tensor(x), as_tensor(w)
    stride, padding = _pair(stride), _quad(padding)
    bias = b.data if b is not None else None
    out = _conv2d_forward(x.data, w.data, bias, stride, padding)
    parents = (x, w) if b is None else (x, w, b)

    def backward(g):
        gx, gw, gb = _conv2d_backward(
            g, x.data, w.data, stride, padding,
            x.requires_grad, w.requires_grad, b is not None and b.requires_grad)
        if gx is not None:
            x.accumulate(gx)
        if gw is not None:
            w.accumulate(gw)
        if gb is not None:
            b.accumulate(gb)

    return make_op(out, parents, backward)


def conv_transpose2d(x, w, b=None, stride=2, padding=1, output_padding=1):
    """Stride-``s`` transposed convolution; weights are (C_in, C_out, kh, kw)."""
    x, w = as_tensor(x), as_tensor(w)
    sh, sw = _pair(stride)
    p = padding
    n, cin, h, win = x.shape
    cin_w, cout, kh, kw = w.shape
    if cin != cin_w:
        raise ShapeError(f"conv_transpose2d: input has {cin} channels, weights expect {cin_w}")
    oh = (h - 1) * sh - 2 * p + kh + output_padding
    ow = (win - 1) * sw - 2 * p + kw + output_padding
    w_mat = np.ascontiguousarray(w.data.reshape(cin, cout * kh * kw))
    out = np.zeros((n, cout, oh, ow), dtype=x.dtype)
    for i in range(n):
        cols = np.ascontiguousarray(w_mat.T @ x.data[i].reshape(cin, h * win))
        kernels.col2im(cols, out[i], kh, kw, sh, sw, p, p, h, win)
    if b is not None:
        out += b.data.reshape(1, cout, 1, 1)
    parents = (x, w) if b is None else (x, w, b)

    def backward(g):
        cols = np.empty((cout * kh * kw, h * win), dtype=x.dtype)
        if x.requires_grad:
            gx = np.empty_like(x.data)
            for i in range(n):
                g_img = np.ascontiguousarray(g[i])
                kernels.im2col(g_img, cols, kh, kw, sh, sw, p, p, h, win)
                np.matmul(w_mat, cols, out=gx[i].reshape(cin, -1))
            x.accumulate(gx)
        if w.requires_grad:
            gw = np.zeros((cin, cout * kh * kw), dtype=w.dtype)
            for i in range(n):
                g_img = np.ascontiguousarray(g[i])
                kernels.im2col(g_img, cols, kh, kw, sh, sw, p, p, h, win)
                gw += x.data[i].reshape(cin, -1) @ cols.T
            w.accumulate(gw.reshape(w.shape))
        if b is not None and b.requires_grad:
            b.accumulate(g.sum(axis=(0, 2, 3)))

    return make_op(out, parents, backward)


# ---------------------------------------------------------------------------
# normalisation, pooling, activations
# ---------------------------------------------------------------------------

def batch_norm(x, gamma, beta, running_mean, running_var,
               training, momentum=0.1, eps=1e-5, update_running=True):
    """Channel-wise batch normalisation over (N, H, W).

    ``running_mean`` / ``running_var`` are plain ndarrays mutated in
    place when ``training and update_running``.
    """
    x = as_tensor(x)
    c = x.shape[1]
    if training:
        mu = x.data.mean(axis=(0, 2, 3))
        var = x.data.var(axis=(0, 2, 3))
        if update_running:
            running_mean *= 1.0 - momentum
            running_mean += momentum * mu
            running_var *= 1.0 - momentum
            running_var += momentum * var
    else:
        mu, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu.reshape(1, c, 1, 1)) * inv_std.reshape(1, c, 1, 1)
    out = gamma.data.reshape(1, c, 1, 1) * xhat + beta.data.reshape(1, c, 1, 1)

    def backward(g):
        axes = (0, 2, 3)
        if gamma.requires_grad:
            gamma.accumulate((g * xhat).sum(axis=axes))
        if beta.requires_grad:
            beta.accumulate(g.sum(axis=axes))
        if x.requires_grad:
            gm = gamma.data.reshape(1, c, 1, 1)
            istd = inv_std.reshape(1, c, 1, 1)
            if training:
                m = g.shape[0] * g.shape[2] * g.shape[3]
                gsum = g.sum(axis=axes).reshape(1, c, 1, 1)
                gxhat = (g * xhat).sum(axis=axes).reshape(1, c, 1, 1)
                gx = gm * istd / m * (m * g - gsum - xhat * gxhat)
            else:
                gx = g * gm * istd
            x.accumulate(gx)

    return make_op(out, (x, gamma, beta), backward)


def avg_pool2d(x, factor):
    """Non-overlapping mean pooling; spatial dims must divide ``factor``."""
    x = as_tensor(x)
    if factor == 1:
        return x
    n, c, h, w = x.shape
    if h % factor or w % factor:
        raise ShapeError(f"avg_pool2d: {h}x{w} not divisible by {factor}")
    out = x.data.reshape(n, c, h // factor, factor, w // factor, factor).mean(axis=(3, 5))

    def backward(g):
        if x.requires_grad:
            gx = np.repeat(np.repeat(g, factor, axis=2), factor, axis=3) / (factor * factor)
            x.accumulate(gx)

    return make_op(out, (x,), backward)


def leaky_relu(x, negative_slope=0.2):
    x = as_tensor(x)
    neg = x.data < 0
    out = np.where(neg, x.data * negative_slope, x.data)

    def backward(g):
        x.accumulate(np.where(neg, g * negative_slope, g))

    return make_op(out, (x,), backward)


def tanh(x):
    x = as_tensor(x)
    out = np.tanh(x.data)

    def backward(g):
        x.accumulate(g * (1.0 - out * out))

    return make_op(out, (x,), backward)


def sigmoid(x):
    x = as_tensor(x)
    d = x.data
    out = np.where(d >= 0, 1.0 / (1.0 + np.exp(-np.abs(d))),
                   np.exp(-np.abs(d)) / (1.0 + np.exp(-np.abs(d))))

    def backward(g):
        x.accumulate(g * out * (1.0 - out))

    return make_op(out, (x,), backward)


def concat(tensors, axis=1):
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]

    def backward(g):
        offset = 0
        for t, s in zip(tensors, sizes):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(offset, offset + s)
                t.accumulate(g[tuple(idx)])
            offset += s

    return make_op(out, tuple(tensors), backward)


# ---------------------------------------------------------------------------
# elementwise / reductions (loss plumbing)
# ---------------------------------------------------------------------------

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        if a.requires_grad:
            a.accumulate(np.broadcast_to(g, a.shape) if a.shape == g.shape else g)
        if b.requires_grad:
            b.accumulate(g)

    return make_op(a.data + b.data, (a, b), backward)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        if a.requires_grad:
            a.accumulate(g)
        if b.requires_grad:
            b.accumulate(-g)

    return make_op(a.data - b.data, (a, b), backward)


def scale(x, k):
    x = as_tensor(x)
    k = float(k)

    def backward(g):
        x.accumulate(g * k)

    return make_op(x.data * k, (x,), backward)


def mean(x):
    x = as_tensor(x)
    n = x.data.size

    def backward(g):
        x.accumulate(np.full(x.shape, float(g) / n, dtype=x.dtype))

    return make_op(np.asarray(x.data.mean()), (x,), backward)


def absolute(x):
    x = as_tensor(x)
    sign = np.sign(x.data)

    def backward(g):
        x.accumulate(g * sign)

    return make_op(np.abs(x.data), (x,), backward)


def log(x):
    x = as_tensor(x)

    def backward(g):
        x.accumulate(g / x.data)

    return make_op(np.log(x.data), (x,), backward)


def one_minus(x):
    x = as_tensor(x)

    def backward(g):
        x.accumulate(-g)

    return make_op(1.0 - x.data, (x,), backward)


def clamp(x, lo, hi):
    x = as_tensor(x)
    inside = (x.data > lo) & (x.data < hi)

    def backward(g):
        x.accumulate(np.where(inside, g, 0.0))

    return make_op(np.clip(x.data, lo, hi), (x,), backward)


# Operator sugar on Tensor, wired here to avoid a circular import.
Tensor.__add__ = lambda self, other: add(self, other)
Tensor.__sub__ = lambda self, other: sub(self, other)
Tensor.__mul__ = lambda self, k: scale(self, k)
Tensor.__rmul__ = lambda self, k: scale(self, k)
Tensor.__neg__ = lambda self: scale(self, -1.0)
