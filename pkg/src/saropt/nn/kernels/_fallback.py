"""Pure-numpy im2col / col2im, used when the compiled extension is absent.

Same contract as the Cython versions in ``_native.pyx`` but vectorised
with one strided slice per kernel offset (k*k slices instead of an
explicit pixel loop).  Top/left padding may be negative (the chunked
convolution shifts its origin per row block), so the image is placed
onto an offset canvas covering exactly the accessed index range.
"""

import numpy as np


def _canvas_geometry(img_shape, kh, kw, sh, sw, pt, pl, oh, ow):
    c, h, w = img_shape
    span_h = (oh - 1) * sh + kh
    span_w = (ow - 1) * sw + kw
    # canvas index 0 corresponds to image row -pt / column -pl
    y_lo, y_hi = max(0, -pt), min(h, span_h - pt)
    x_lo, x_hi = max(0, -pl), min(w, span_w - pl)
    return span_h, span_w, y_lo, y_hi, x_lo, x_hi


def im2col(img, cols, kh, kw, sh, sw, pt, pl, oh, ow):
    c = img.shape[0]
    span_h, span_w, y_lo, y_hi, x_lo, x_hi = _canvas_geometry(
        img.shape, kh, kw, sh, sw, pt, pl, oh, ow)
    canvas = np.zeros((c, span_h, span_w), dtype=img.dtype)
    if y_hi > y_lo and x_hi > x_lo:
        canvas[:, y_lo + pt:y_hi + pt, x_lo + pl:x_hi + pl] = \
            img[:, y_lo:y_hi, x_lo:x_hi]
    out = cols.reshape(c, kh, kw, oh, ow)
    for i in range(kh):
        for j in range(kw):
            out[:, i, j] = canvas[:, i:i + oh * sh:sh, j:j + ow * sw:sw]


def col2im(cols, img, kh, kw, sh, sw, pt, pl, oh, ow):
    c = img.shape[0]
    span_h, span_w, y_lo, y_hi, x_lo, x_hi = _canvas_geometry(
        img.shape, kh, kw, sh, sw, pt, pl, oh, ow)
    canvas = np.zeros((c, span_h, span_w), dtype=img.dtype)
    src = cols.reshape(c, kh, kw, oh, ow)
    for i in range(kh):
        for j in range(kw):
            canvas[:, i:i + oh * sh:sh, j:j + ow * sw:sw] += src[:, i, j]
    if y_hi > y_lo and x_hi > x_lo:
        img[:, y_lo:y_hi, x_lo:x_hi] += \
            canvas[:, y_lo + pt:y_hi + pt, x_lo + pl:x_hi + pl]
