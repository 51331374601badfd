#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the raw im2col/col2im kernels on layer geometries taken from the
translation networks, then an end-to-end translator forward pass with
each backend swapped in.  Run:

    python benchmarks/bench_kernels.py [--repeats N] [--full]

--full adds the default-size (base 50, 6 scales) translator forward,
which is slow on small machines; the default benchmarks a mid-size
model.
"""

import argparse
import time

import numpy as np

from saropt.nn import kernels
from saropt.nn.kernels import _fallback

try:
    from saropt.nn.kernels import _native
except ImportError:
    _native = None

KERNEL_CASES = [
    # name, channels, H, W, kernel, stride, pad
    ("enc 3x3 s1 50ch 256px", 50, 256, 256, 3, 1, 1),
    ("enc 3x3 s2 100ch 128px", 100, 128, 128, 3, 2, 1),
    ("dec 3x3 s1 200ch 64px", 200, 64, 64, 3, 1, 1),
    ("critic 4x4 s2 64ch 256px", 64, 256, 256, 4, 2, 1),
]


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raw_kernels(repeats):
    rng = np.random.default_rng(0)
    print(f"{'case':<28}{'python':>10}{'native':>10}{'speedup':>9}")
    for name, c, h, w, k, s, p in KERNEL_CASES:
        img = np.ascontiguousarray(rng.normal(size=(c, h, w)).astype(np.float32))
        oh = (h + 2 * p - k) // s + 1
        ow = (w + 2 * p - k) // s + 1
        cols = np.zeros((c * k * k, oh * ow), dtype=np.float32)
        out = np.zeros_like(img)

        def run(impl):
            impl.im2col(img, cols, k, k, s, s, p, p, oh, ow)
            out[...] = 0.0
            impl.col2im(cols, out, k, k, s, s, p, p, oh, ow)

        t_py = time_call(lambda: run(_fallback), repeats)
        if _native is None:
            print(f"{name:<28}{t_py * 1e3:>8.1f}ms{'-':>10}{'-':>9}")
            continue
        t_nat = time_call(lambda: run(_native), repeats)
        print(f"{name:<28}{t_py * 1e3:>8.1f}ms{t_nat * 1e3:>8.1f}ms"
              f"{t_py / t_nat:>8.1f}x")


def bench_translator(repeats, full):
    from saropt.models import TranslatorConfig, build_translator
    from saropt.nn import no_grad
    from saropt.nn.autograd import Tensor

    if full:
        cfg, size = TranslatorConfig(), 256
    else:
        cfg = TranslatorConfig(base_feature_maps=8, num_scales=4, input_size=128)
        size = 128
    net = build_translator(cfg, init_seed=0).eval()
    x = Tensor(np.zeros((1, 1, size, size), dtype=np.float32))

    def forward():
        with no_grad():
            net(x)

    results = {}
    backends = {"python": _fallback}
    if _native is not None:
        backends["native"] = _native
    saved = (kernels.im2col, kernels.col2im)
    try:
        for name, impl in backends.items():
            kernels.im2col, kernels.col2im = impl.im2col, impl.col2im
            forward()  # warm up
            results[name] = time_call(forward, repeats)
    finally:
        kernels.im2col, kernels.col2im = saved
    label = f"translator fwd {size}px (base {cfg.base_feature_maps})"
    t_py = results["python"]
    if "native" in results:
        t_nat = results["native"]
        print(f"{label:<28}{t_py * 1e3:>8.1f}ms{t_nat * 1e3:>8.1f}ms"
              f"{t_py / t_nat:>8.1f}x")
    else:
        print(f"{label:<28}{t_py * 1e3:>8.1f}ms{'-':>10}{'-':>9}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--full", action="store_true",
                        help="benchmark the full-size translator")
    args = parser.parse_args()
    print(f"active backend at import: {kernels.BACKEND}")
    if _native is None:
        print("compiled extension unavailable; showing fallback timings only")
    bench_raw_kernels(args.repeats)
    bench_translator(args.repeats, args.full)


if __name__ == "__main__":
    main()
