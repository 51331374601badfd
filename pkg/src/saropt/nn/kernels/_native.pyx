# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled im2col / col2im kernels.

These two routines are the hot inner loops of every convolution and
transposed convolution in the package.  Layout convention:

  image   : (C, H, W) single sample, C-contiguous
  columns : (C * KH * KW, OH * OW)   one column per output position

Padding is asymmetric (top, left given; bottom/right implied by the
output size).  Inner loops are split into [left pad | body | right pad]
so the body runs without bounds tests (memcpy when stride is 1).
"""

from libc.string cimport memcpy, memset

import numpy as np

cimport cython
cimport numpy as cnp

ctypedef fused real:
    float
    double


cdef inline int int_max(int a, int b) nogil:
    return a if a > b else b


cdef inline int int_min(int a, int b) nogil:
    return a if a < b else b


cdef inline void _body_range(int k_off, int pad, int in_size, int stride,
                             int out_size, int* lo, int* hi) nogil:
    """Output-index range [lo, hi) whose input index k_off + o*stride - pad
    lands inside [0, in_size)."""
    cdef int start = pad - k_off
    cdef int l = 0
    if start > 0:
        l = (start + stride - 1) // stride
    cdef int h = (in_size - 1 + pad - k_off) // stride + 1
    lo[0] = int_max(l, 0)
    hi[0] = int_min(h, out_size)
    if hi[0] < lo[0]:
        hi[0] = lo[0]


cpdef void im2col(real[:, :, ::1] img, real[:, ::1] cols,
                  int kh, int kw, int sh, int sw,
                  int pt, int pl, int oh, int ow) nogil:
    """Gather kh*kw patches of ``img`` into ``cols`` (zero padding)."""
    cdef int C = img.shape[0]
    cdef int H = img.shape[1]
    cdef int W = img.shape[2]
    cdef int c, i, j, oy, ox, iy, row, x_lo, x_hi, base, src0
    cdef real* dst
    cdef const real* src
    for c in range(C):
        for i in range(kh):
            for j in range(kw):
                row = (c * kh + i) * kw + j
                _body_range(j, pl, W, sw, ow, &x_lo, &x_hi)
                for oy in range(oh):
                    iy = oy * sh + i - pt
                    base = oy * ow
                    dst = &cols[row, base]
                    if iy < 0 or iy >= H:
                        memset(dst, 0, ow * sizeof(real))
                        continue
                    for ox in range(x_lo):
                        dst[ox] = 0
                    src0 = x_lo * sw + j - pl
                    src = &img[c, iy, 0]
                    if sw == 1:
                        memcpy(dst + x_lo, src + src0,
                               (x_hi - x_lo) * sizeof(real))
                    else:
                        for ox in range(x_lo, x_hi):
                            dst[ox] = src[src0 + (ox - x_lo) * sw]
                    for ox in range(x_hi, ow):
                        dst[ox] = 0


cpdef void col2im(real[:, ::1] cols, real[:, :, ::1] img,
                  int kh, int kw, int sh, int sw,
                  int pt, int pl, int oh, int ow) nogil:
    """Scatter-add ``cols`` back into ``img`` (adjoint of im2col).

    ``img`` must be zero-initialised by the caller; contributions from
    overlapping windows accumulate.
    """
    cdef int C = img.shape[0]
    cdef int H = img.shape[1]
    cdef int W = img.shape[2]
    cdef int c, i, j, oy, ox, iy, row, x_lo, x_hi, base, dst0
    cdef real* dst
    cdef const real* src
    for c in range(C):
        for i in range(kh):
            for j in range(kw):
                row = (c * kh + i) * kw + j
                _body_range(j, pl, W, sw, ow, &x_lo, &x_hi)
                for oy in range(oh):
                    iy = oy * sh + i - pt
                    if iy < 0 or iy >= H:
                        continue
                    base = oy * ow
                    src = &cols[row, base]
                    dst = &img[c, iy, 0]
                    dst0 = x_lo * sw + j - pl
                    if sw == 1:
                        for ox in range(x_lo, x_hi):
                            dst[dst0 + (ox - x_lo)] += src[ox]
                    else:
                        for ox in range(x_lo, x_hi):
                            dst[dst0 + (ox - x_lo) * sw] += src[ox]
