"""Benchmark the hot kernels across available backends.

Workloads mirror production shapes: peak picking over thousands of
posterior streams, temporal NMS per (episode, word) group, and greedy
detection-to-positive matching during evaluation.

Run as: python benchmarks/bench_kernels.py [--scale N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from signforge import kernels


def _time(fn, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_first_argmax(impl, rng, scale):
    streams = [rng.random(250) for _ in range(2000 * scale)]

    def run():
        for s in streams:
            impl.first_argmax(s)

    return run


def bench_nms(impl, rng, scale):
    groups = [np.sort(rng.random(200) * 3600.0)[::-1].copy() for _ in range(200 * scale)]

    def run():
        for peaks in groups:
            impl.nms_keep(peaks, 0.6)

    return run


def bench_greedy_match(impl, rng, scale):
    cases = []
    for _ in range(300 * scale):
        n_gt = 40
        gt_starts = np.sort(rng.random(n_gt) * 3600.0)
        gt_ends = gt_starts + 0.6
        det_starts = np.sort(rng.random(120) * 3600.0)
        det_ends = det_starts + 0.6
        cases.append((det_starts, det_ends, gt_starts, gt_ends))

    def run():
        for det_starts, det_ends, gt_starts, gt_ends in cases:
            impl.greedy_match(det_starts, det_ends, gt_starts, gt_ends, 0.5)

    return run


BENCHES = [
    ("first_argmax (2000 streams x 250)", bench_first_argmax),
    ("nms_keep (200 groups x 200 peaks)", bench_nms),
    ("greedy_match (300 classes, 120 det x 40 gt)", bench_greedy_match),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", type=int, default=1, help="workload multiplier")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    available = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(available)}")
    if len(available) == 1:
        print("note: compiled extension not built, timing the fallback only")
    for label, make in BENCHES:
        times = {}
        for name, impl in available.items():
            rng = np.random.default_rng(args.seed)
            times[name] = _time(make(impl, rng, args.scale))
        line = f"{label}: " + "  ".join(f"{n} {t * 1000:.1f} ms" for n, t in times.items())
        if "cython" in times and "python" in times and times["cython"] > 0:
            line += f"  (speedup {times['python'] / times['cython']:.1f}x)"
        print(line)


if __name__ == "__main__":
    main()
