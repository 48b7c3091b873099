#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two hot loops (queue event race, async-SGD stepping) on both
backends, checks the outputs are bit-identical, and prints a table.

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from stale_momentum import _reference
from stale_momentum._backend import HAVE_COMPILED

if HAVE_COMPILED:
    from stale_momentum import _kernels


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def bench_queue(workers=8, writes=200_000):
    rng = np.random.default_rng(0)
    per_worker = writes // workers + 4096
    work = rng.exponential(size=workers * per_worker)
    offsets = np.arange(workers + 1, dtype=np.int64) * per_worker
    total = writes + workers

    t_py, out_py = best_of(lambda: _reference.queue_race(work, offsets, total))
    rows = [("queue_race (pure numpy)", t_py, None)]
    if HAVE_COMPILED:
        t_c, out_c = best_of(lambda: _kernels.queue_race(work, offsets, total))
        assert all(np.array_equal(a, b) for a, b in zip(out_c[:3], out_py[:3]))
        rows.append(("queue_race (compiled)", t_c, t_py / t_c))
    return f"queue race: M={workers}, {writes} writes", rows


def bench_async(runs=10_000, steps=100, dim=1):
    rng = np.random.default_rng(1)
    lam = np.ascontiguousarray(rng.uniform(0.5, 3.0, size=dim))
    w_star = np.zeros(dim)
    w0 = np.ones(dim)
    tau = rng.geometric(0.5, size=(steps, runs)) - 1
    read_idx = np.maximum(np.arange(steps)[:, None] - tau, 0).astype(np.int64)
    noise = 0.01 * rng.standard_normal((steps, runs, dim))

    def run_py():
        out = np.empty((steps + 1, runs, dim))
        _reference.async_runs(lam, None, w_star, w0, 0.1, 0.2, read_idx, noise, out)
        return out

    t_py, out_py = best_of(run_py)
    rows = [("async_runs (pure numpy)", t_py, None)]
    if HAVE_COMPILED:

        def run_c():
            out = np.empty((steps + 1, runs, dim))
            _kernels.async_runs(lam, w_star, w0, 0.1, 0.2, read_idx, noise, out)
            return out

        t_c, out_c = best_of(run_c)
        assert np.array_equal(out_c, out_py)
        rows.append(("async_runs (compiled)", t_c, t_py / t_c))
    return f"async ensemble: {runs} runs x {steps} steps, dim {dim}", rows


def main():
    if not HAVE_COMPILED:
        print("compiled extension not built; timing the pure backend only")
    for title, rows in (bench_queue(), bench_async()):
        print(f"\n{title}")
        for name, seconds, speedup in rows:
            extra = f"  ({speedup:.1f}x speedup)" if speedup else ""
            print(f"  {name:<28} {seconds * 1e3:8.2f} ms{extra}")
    if HAVE_COMPILED:
        print("\noutputs verified bit-identical across backends")


if __name__ == "__main__":
    main()
