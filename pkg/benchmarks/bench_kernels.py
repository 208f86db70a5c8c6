#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage:
    python benchmarks/bench_kernels.py [--width 1280] [--height 720] [--repeats 5]

Also cross-checks that both backends return bit-identical results on the
benchmark frame before timing them.
"""

import argparse
import statistics
import time

import numpy as np

from forgebench.kernels import pure

try:
    from forgebench import _kernels as ext
except ImportError:
    ext = None


def time_call(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--width", type=int, default=1280)
    parser.add_argument("--height", type=int, default=720)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--noise-repeats", type=int, default=1,
                        help="The pure noise kernel is slow; keep this small.")
    args = parser.parse_args()

    if ext is None:
        print("compiled extension not available; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    frame = rng.integers(0, 256, size=(args.height, args.width, 3), dtype=np.uint8)

    cases = [
        ("gaussian_noise_u8", lambda m: m.gaussian_noise_u8(frame, 15.0, 42), args.noise_repeats),
        ("grayscale_u8", lambda m: m.grayscale_u8(frame), args.repeats),
        ("sepia_u8", lambda m: m.sepia_u8(frame), args.repeats),
        ("box_downscale_u8 (x4)", lambda m: m.box_downscale_u8(frame, 4), args.repeats),
        ("laplacian_mean", lambda m: m.laplacian_mean(frame), args.repeats),
    ]

    print(f"frame: {args.width}x{args.height}, repeats: {args.repeats} (median)\n")
    print("| kernel | ext (ms) | pure (ms) | speedup |")
    print("|---|---|---|---|")
    for name, call, repeats in cases:
        ext_result = call(ext)
        pure_result = call(pure)
        if isinstance(ext_result, np.ndarray):
            assert np.array_equal(ext_result, pure_result), f"{name}: backends disagree"
        else:
            assert ext_result == pure_result, f"{name}: backends disagree"
        ext_ms = 1000 * time_call(lambda: call(ext), repeats)
        pure_ms = 1000 * time_call(lambda: call(pure), repeats)
        print(f"| {name} | {ext_ms:.2f} | {pure_ms:.2f} | {pure_ms / ext_ms:.1f}x |")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
