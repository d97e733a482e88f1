"""Benchmark the compiled FFTW kernel against the numpy fallback.

Times the production run loop (engine setup, split-step substeps, per-kick
renormalization; no observable sink) for each available backend over a range
of grid sizes, and cross-checks that both backends land on the same final
state. Kick counts shrink with grid size so every cell costs roughly the
same wall time.

Usage:
    python benchmarks/bench_kernels.py [--sizes 4096,16384] [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ptkho import backend
from ptkho.evolution import FloquetParams, RunConfig, run
from ptkho.grid import make_grid

# Hermitian nonresonant parameters keep the state localized, so no grid in
# this sweep needs an edge-guard allowance that depends on its size.
PARAMS = FloquetParams(kick_strength=5.0, kick_gain=0.0,
                       osc_freq=2.0 * np.pi / np.e**2, hbar_eff=0.1,
                       substeps=200)


def time_run(size: int, kicks: int, name: str, repeats: int):
    grid = make_grid(size, PARAMS.hbar_eff)
    config = RunConfig(params=PARAMS, total_kicks=kicks, edge_guard=0.5)
    best = np.inf
    state = None
    for _ in range(repeats):
        started = time.perf_counter()
        state = run(config, grid, backend=name)
        best = min(best, time.perf_counter() - started)
    return best, state


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="4096,16384,65536",
                        help="comma-separated grid sizes (default %(default)s)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="best-of repeat count per cell (default %(default)s)")
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]

    names = backend.available_backends()
    print(f"backends: {', '.join(names)} (default: {backend.active_name})")
    print(f"substeps per kick: {PARAMS.substeps}, best of {args.repeats}\n")

    for size in sizes:
        kicks = max(2, 262144 // size)
        print(f"grid {size:>6}  ({kicks} kicks)")
        finals = {}
        timings = {}
        for name in names:
            seconds, state = time_run(size, kicks, name, args.repeats)
            timings[name] = seconds
            finals[name] = state.amplitudes
            per_substep = 1e6 * seconds / (kicks * PARAMS.substeps)
            print(f"  {name:>5}: {1e3 * seconds:8.1f} ms total, "
                  f"{1e3 * seconds / kicks:7.2f} ms/kick, "
                  f"{per_substep:6.1f} us/substep")
        if len(names) == 2:
            ratio = timings["numpy"] / timings["fftw"]
            drift = float(np.max(np.abs(finals["fftw"] - finals["numpy"])))
            print(f"  fftw speedup {ratio:4.2f}x, max final-state "
                  f"difference {drift:.2e}")
        print()


if __name__ == "__main__":
    main()
