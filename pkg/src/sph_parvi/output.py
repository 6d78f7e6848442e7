"""Output bundle: CSV artifacts and the JSON run summary.

A run directory contains particles_final.csv, particles_best.csv,
trace.csv, summary.json, and snapshots/snapshot_<iter>.csv. Floats are
written with 17 significant digits so rereading reproduces them exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .sampler import RunReport
from .targets import TargetModel

__all__ = [
    "format_float",
    "write_particles_csv",
    "trace_header",
    "trace_row",
    "run_diagnostics",
    "write_artifacts",
    "write_summary",
]

KDE_GRID_POINTS = 201
HISTOGRAM_BINS = 32


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_particles_csv(path: Path, positions: np.ndarray) -> None:
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    d = positions.shape[1]
    with open(path, "w", newline="") as f:
        f.write(",".join(f"dim{k}" for k in range(d)) + "\n")
        for row in positions:
            f.write(",".join(format_float(v) for v in row) + "\n")


def trace_header() -> str:
    return "iter,avg_density,kinetic_energy\n"


def trace_row(iteration: int, avg_density: float, kinetic_energy: float) -> str:
    return f"{iteration},{format_float(avg_density)},{format_float(kinetic_energy)}\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _cloud_block(positions: np.ndarray, target: TargetModel | None) -> dict:
    """Diagnostics for one particle cloud: moments, W1, KDE, histogram, occupancy."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    mom = diag.moments(positions)
    block = {
        "moments": {"mean": mom.mean, "var": mom.var, "degenerate": mom.degenerate},
        "w1": None,
        "mode_occupancy": None,
        "kde": [],
        "histogram": [],
    }
    if target is not None and target.has_analytic_marginals:
        block["w1"] = diag.w1_per_dim(positions, target)
        block["mode_occupancy"] = diag.mode_occupancy(positions, target)
    for k in range(positions.shape[1]):
        x = positions[:, k]
        bw = diag.silverman_bandwidth(x)
        lo, hi = float(x.min()) - 3.0 * bw, float(x.max()) + 3.0 * bw
        grid = np.linspace(lo, hi, KDE_GRID_POINTS)
        block["kde"].append({"grid": grid, "density": diag.kde_1d(x, grid)})
        edges, masses = diag.histogram(x, HISTOGRAM_BINS)
        block["histogram"].append({"edges": edges, "masses": masses})
    return block


def run_diagnostics(report: RunReport, target: TargetModel | None) -> dict:
    out = {
        "final": _cloud_block(report.final_positions, target),
        "best": {"iteration": report.best_iteration, **_cloud_block(report.best_positions, target)},
    }
    initial = next((pos for it, pos in report.snapshots if it == 0), None)
    if initial is not None:
        out["initial"] = _cloud_block(initial, target)
    return out


def write_artifacts(outdir: str | Path, report: RunReport) -> None:
    """Write the particle CSVs and snapshots (trace.csv is streamed during the run)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_particles_csv(outdir / "particles_final.csv", report.final_positions)
    write_particles_csv(outdir / "particles_best.csv", report.best_positions)
    if report.snapshots:
        snapdir = outdir / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for iteration, positions in report.snapshots:
            write_particles_csv(snapdir / f"snapshot_{iteration}.csv", positions)


def write_summary(
    outdir: str | Path,
    report: RunReport,
    diagnostics_block: dict,
    timing: dict,
    traces_meta_extra: dict | None = None,
) -> None:
    outdir = Path(outdir)
    summary = {
        "status": report.status,
        "config": report.config_echo,
        "diagnostics": diagnostics_block,
        "traces_meta": {
            "iterations_completed": int(report.avg_density_trace.size),
            "columns": ["iter", "avg_density", "kinetic_energy"],
            "best_iteration": report.best_iteration,
            "failed_iteration": report.failed_iteration,
            "failure_message": report.failure_message,
            **(traces_meta_extra or {}),
        },
        "timing": timing,
    }
    with open(outdir / "summary.json", "w") as f:
        json.dump(_jsonable(summary), f, indent=2, sort_keys=True)
        f.write("\n")
