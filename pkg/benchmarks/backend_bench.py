"""Benchmark the compiled core against the numpy fallback.

Times one full per-iteration workload (pair cache + density + total
acceleration) per backend and particle count, interleaving repetitions and
keeping per-cell minima so shared-host jitter cancels. Prints a table with
per-doubling scaling factors; the expected factor for an O(M^2) sweep is 4.

Usage:
    python3 benchmarks/backend_bench.py [--sizes 250,500,1000] [--rounds 30]
"""

import argparse
import gc
import math
import time

import numpy as np

from sph_parvi import backends, forces
from sph_parvi.kernels import make_kernel
from sph_parvi.state import FluidParams, ParticleSystem
from sph_parvi.targets import gaussian_target


def make_state(m: int, rng: np.random.Generator) -> ParticleSystem:
    pos = rng.normal(size=(m, 2))
    return ParticleSystem(pos, 0.1 * rng.normal(size=(m, 2)), np.ones(m), np.full(m, 1.0 / m))


def one_iteration(ps: ParticleSystem, spec, target, params) -> None:
    cache = forces.build_cache(ps, spec)
    rho = forces.summation_density(ps, cache, params)
    ps2 = ParticleSystem(ps.positions, ps.velocities, rho, ps.masses)
    forces.total_acceleration(ps2, cache, target, params, "external_force")


def bench(sizes: list[int], rounds: int) -> dict[str, dict[int, float]]:
    rng = np.random.default_rng(0)
    states = {m: make_state(m, rng) for m in sizes}
    spec = make_kernel("cubic_spline", 2, 0.5)
    target = gaussian_target([0.0, 0.0], [1.0, 1.0])
    params = FluidParams(c0=1.4, rho0=0.006, viscosity_mode="linear_artificial", visc_alpha=0.5)

    names = backends.available_backends()
    results: dict[str, dict[int, float]] = {name: {m: math.inf for m in sizes} for name in names}
    saved = backends.ACTIVE
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for name in names:  # warmup every cell once
            backends.ACTIVE = backends.get_backend(name)
            for m in sizes:
                one_iteration(states[m], spec, target, params)
        for _ in range(rounds):
            for name in names:
                backends.ACTIVE = backends.get_backend(name)
                for m in sizes:
                    t0 = time.perf_counter()
                    one_iteration(states[m], spec, target, params)
                    results[name][m] = min(results[name][m], time.perf_counter() - t0)
    finally:
        backends.ACTIVE = saved
        if gc_was_enabled:
            gc.enable()
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="250,500,1000", help="comma-separated particle counts")
    parser.add_argument("--rounds", type=int, default=30, help="interleaved repetitions per cell")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s]

    results = bench(sizes, args.rounds)

    header = "backend".ljust(10) + "".join(f"M={m}".rjust(12) for m in sizes)
    if len(sizes) >= 2:
        header += "  per-doubling"
    print(header)
    print("-" * len(header))
    for name, times in results.items():
        row = name.ljust(10) + "".join(f"{times[m] * 1e3:9.3f} ms" for m in sizes)
        if len(sizes) >= 2:
            factor = (times[sizes[-1]] / times[sizes[0]]) ** (1.0 / (len(sizes) - 1))
            row += f"  {factor:10.2f}x"
        print(row)
    if "cython" in results and "python" in results:
        speedups = [results["python"][m] / results["cython"][m] for m in sizes]
        print("\nspeedup (python / cython): " + ", ".join(f"M={m}: {s:.1f}x" for m, s in zip(sizes, speedups)))


if __name__ == "__main__":
    main()
