"""Command-line entry point: run, validate, selftest.

Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 numeric failure during a run (partial outputs are still written).
SPH_PARVI_THREADS pins the worker count (both backends are single-threaded,
so every value currently behaves like 1 and runs are deterministic).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import backends, config as config_mod, output, sampler
from .errors import ConfigurationError

__all__ = ["main", "cmd_run", "cmd_validate", "cmd_selftest"]


def _threads_from_env() -> int:
    raw = os.environ.get("SPH_PARVI_THREADS", "1").strip() or "1"
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigurationError(f"SPH_PARVI_THREADS must be a positive integer, got {raw!r}")
    if threads < 1:
        raise ConfigurationError(f"SPH_PARVI_THREADS must be >= 1, got {threads}")
    return threads


def _load(args) -> sampler.RunConfig:
    raw = config_mod.load_config(args.config)
    raw = config_mod.apply_overrides(raw, args.set or [])
    return config_mod.parse_config(raw)


def cmd_run(args) -> int:
    try:
        threads = _threads_from_env()
        cfg = _load(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "trace.csv", "w", newline="") as trace_file:
        trace_file.write(output.trace_header())
        trace_file.flush()

        def sink(iteration: int, avg_density: float, kinetic_energy: float):
            trace_file.write(output.trace_row(iteration, avg_density, kinetic_energy))
            trace_file.flush()

        report = sampler.run(cfg, trace_sink=sink)

    t_diag = time.perf_counter()
    diagnostics_block = output.run_diagnostics(report, cfg.target)
    diag_seconds = time.perf_counter() - t_diag

    t_write = time.perf_counter()
    output.write_artifacts(outdir, report)
    write_seconds = time.perf_counter() - t_write
    timing = {
        "initialize": report.wall_time["initialize"],
        "iterations": report.wall_time["iterations"],
        "diagnostics": diag_seconds,
        "write": write_seconds,
        "total": report.wall_time["total"] + diag_seconds + write_seconds,
    }
    meta = {"backend": backends.ACTIVE_NAME, "threads": threads}
    output.write_summary(outdir, report, diagnostics_block, timing, traces_meta_extra=meta)

    if report.status != "ok":
        print(f"run failed: {report.failure_message}", file=sys.stderr)
        return 3
    print(f"run ok: {report.avg_density_trace.size} iterations, outputs in {outdir}")
    return 0


def cmd_validate(args) -> int:
    try:
        cfg = _load(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(cfg.echo, indent=2, sort_keys=True))
    return 0


def _selftest_checks():
    from . import diagnostics, forces, kernels, targets
    from .state import FluidParams, ParticleSystem

    def kernel_normalization():
        spec = kernels.make_kernel("cubic_spline", 2, 0.7)
        r = (np.arange(200_000) + 0.5) / 200_000 * 2 * spec.h
        integral = float(np.sum(kernels.kernel_value(spec, r) * 2 * np.pi * r) * (2 * spec.h / 200_000))
        return abs(integral - 1.0) < 1e-4

    def kernel_gradient():
        spec = kernels.make_kernel("poly6", 3, 0.9)
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.uniform(-0.5, 0.5, size=3)
            y = rng.uniform(-0.5, 0.5, size=3)
            grad = kernels.kernel_grad(spec, x, y)
            eps = 1e-6
            for k in range(3):
                shift = np.zeros(3)
                shift[k] = eps
                fd = (
                    kernels.kernel_value(spec, float(np.linalg.norm(x + shift - y)))
                    - kernels.kernel_value(spec, float(np.linalg.norm(x - shift - y)))
                ) / (2 * eps)
                if abs(fd - grad[k]) > 1e-6 * (1 + abs(fd)):
                    return False
        return True

    def score_consistency():
        target = targets.mixture_target([(0.5, [-1.0, 0.0], [1.0, 2.0]), (0.5, [1.0, 0.0], [0.5, 1.0])])
        return targets.check_score(target) < 1e-5

    def momentum_balance():
        rng = np.random.default_rng(2)
        ps = ParticleSystem(
            positions=rng.uniform(0, 1, size=(8, 2)),
            velocities=rng.normal(0, 1, size=(8, 2)),
            densities=rng.uniform(0.5, 2.0, size=8),
            masses=rng.uniform(0.5, 2.0, size=8),
        )
        spec = kernels.make_kernel("cubic_spline", 2, 0.8)
        cache = forces.build_cache(ps, spec)
        f = forces.pressure_force(ps, cache, rng.normal(0, 1, size=8))
        net = np.abs((ps.masses[:, None] * f).sum(axis=0)).max()
        scale = np.abs(ps.masses[:, None] * f).sum()
        return net <= 1e-10 * max(scale, 1.0)

    def run_determinism():
        cfg = sampler.RunConfig(
            mode="external_force",
            M=24,
            d=1,
            T=25,
            h_schedule=sampler.HSchedule(kind="constant", start=0.4),
            init=sampler.InitSpec.uniform([-2.0], [2.0]),
            target=targets.gaussian_target([0.0], [1.0]),
            fluid=FluidParams(),
            seed=11,
        )
        a = sampler.run(cfg)
        b = sampler.run(cfg)
        return a.status == "ok" and np.array_equal(a.final_positions, b.final_positions)

    def w1_point_mass():
        target = targets.gaussian_target([0.0], [1.0])
        w1 = diagnostics.w1_per_dim(np.zeros((64, 1)), target)[0]
        return abs(w1 - np.sqrt(2 / np.pi)) < 1e-9

    return [
        ("kernel normalization quadrature", kernel_normalization),
        ("kernel gradient finite differences", kernel_gradient),
        ("target score consistency", score_consistency),
        ("pressure momentum balance", momentum_balance),
        ("run determinism", run_determinism),
        ("w1 point-mass value", w1_point_mass),
    ]


def cmd_selftest(_args) -> int:
    print(f"backend: {backends.ACTIVE_NAME} (available: {', '.join(backends.available_backends())})")
    failures = 0
    for name, check in _selftest_checks():
        try:
            ok = check()
        except Exception as exc:  # a crashed check is a failed check
            ok = False
            print(f"FAIL {name}: {exc}")
            failures += 1
            continue
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sph-parvi", description="SPH particle variational inference sampler")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sampling run and write the output bundle")
    p_run.add_argument("--config", required=True, help="path to a JSON config file")
    p_run.add_argument("--out", required=True, help="output directory for the bundle")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry (dotted path)")
    p_run.set_defaults(fn=cmd_run)

    p_val = sub.add_parser("validate", help="check a config file and print its normalized form")
    p_val.add_argument("--config", required=True)
    p_val.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_val.set_defaults(fn=cmd_validate)

    p_self = sub.add_parser("selftest", help="run fast internal consistency checks")
    p_self.set_defaults(fn=cmd_selftest)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
