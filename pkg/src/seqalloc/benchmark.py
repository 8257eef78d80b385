"""Benchmark the compiled picking kernel against the pure-Python fallback.

Run with ``seqalloc bench`` or ``python -m seqalloc.benchmark``. The
workload is the compiled reference formula's 66-item instance, replayed
many times, which is the shape of work the brute-force verifiers generate.
"""

from __future__ import annotations

import random
import time

from . import _alloc_py, kernel
from .golden import REFERENCE_FORMULA
from .reduction import build_instance, parse_formula


def _reduction_workload():
    out = build_instance(parse_formula(REFERENCE_FORMULA))
    inst = out.instance
    item_index = {o: k for k, o in enumerate(inst.items)}
    agent_index = {a: i for i, a in enumerate(inst.agents)}
    prefs = [[item_index[o] for o in inst.preferences[a]] for a in inst.agents]
    seq = [agent_index[a] for a in inst.sequence]
    return "66-item reduction instance", prefs, seq, len(inst.items)


def _synthetic_workload(n: int = 12, m: int = 2000):
    rng = random.Random(1)
    prefs = [rng.sample(range(m), m) for _ in range(n)]
    seq = [rng.randrange(n) for _ in range(m)]
    return f"synthetic {n}x{m} instance", prefs, seq, m


def _time(fn, prefs, seq, m, repeats: int) -> float:
    fn(prefs, seq, m)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(prefs, seq, m)
    return time.perf_counter() - t0


def run_benchmark(repeats: int = 200) -> dict[str, dict[str, float]]:
    all_timings: dict[str, dict[str, float]] = {}
    for label, prefs, seq, m in (_reduction_workload(), _synthetic_workload()):
        sanity = _alloc_py.allocate(prefs, seq, m)
        timings = {"python": _time(_alloc_py.allocate, prefs, seq, m, repeats)}
        if kernel.BACKEND == "cython":
            assert kernel.allocate(prefs, seq, m) == sanity, "kernel outputs diverge"
            timings["cython"] = _time(kernel.allocate, prefs, seq, m, repeats)
        all_timings[label] = timings

        print(f"workload: {label}, {repeats} allocations per backend")
        for name, elapsed in timings.items():
            print(
                f"  {name:>7}: {elapsed * 1e3:8.2f} ms total,"
                f" {elapsed / repeats * 1e6:9.1f} us/alloc"
            )
        if "cython" in timings:
            print(f"  speedup: {timings['python'] / timings['cython']:.1f}x")
        else:
            print("  compiled kernel not available; pure Python only")
    return all_timings


if __name__ == "__main__":
    run_benchmark()
