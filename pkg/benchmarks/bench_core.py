#!/usr/bin/env python3
"""Benchmark the compiled core against the pure-Python fallback.

Both backends execute identical event sequences (same seeds, same float
operations), so the comparison is pure implementation overhead. Usage:

    python benchmarks/bench_core.py [--size 128] [--repeats 3]
"""

import argparse
import time

from empires import lattice as lat
from empires.backend import get_backend
from empires.rng import derive_stream

WORKLOADS = [
    ("constant / aggregate-sampler", 0, 1),
    ("boundary-length / aggregate-sampler", 2, 1),
    ("boundary-length / per-edge-queue", 2, 2),
    ("area-product / aggregate-sampler", 1, 1),
]


def run_once(mod, spec, kind, sched, seed=1):
    core = mod.SimCore(spec.n_cells, lat.initial_edges(spec))
    t0 = time.perf_counter()
    out = core.gillespie_run(kind, 1.0, None, derive_stream(seed, 0), sched,
                             mod.STOP_REGIONS, 1.0, 0, [], 0, [], [], False)
    return out[1], time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    spec = lat.square(args.size, args.size)
    backends = {}
    for name in ("python", "compiled"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"note: {name} backend unavailable")

    print(f"lattice {args.size}x{args.size}, full coalescence, "
          f"best of {args.repeats}")
    header = f"{'workload':38s}" + "".join(f"{n:>14s}" for n in backends)
    print(header + ("   speedup" if len(backends) == 2 else ""))
    for label, kind, sched in WORKLOADS:
        rates = {}
        for name, mod in backends.items():
            best = None
            for r in range(args.repeats):
                events, dt = run_once(mod, spec, kind, sched, seed=1 + r)
                rate = events / dt
                best = rate if best is None else max(best, rate)
            rates[name] = best
        row = f"{label:38s}" + "".join(f"{rates[n] / 1e3:11.0f}k/s"
                                       for n in backends)
        if len(rates) == 2:
            row += f"{rates['compiled'] / rates['python']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
