"""Loading and validating an output bundle directory."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Bundle", "BundleError", "load_bundle"]


class BundleError(Exception):
    """The run directory is missing files or they do not parse."""


@dataclass(frozen=True)
class Bundle:
    run_dir: Path
    summary: dict
    final: np.ndarray  # (M, d)
    best: np.ndarray  # (M, d)
    iterations: np.ndarray  # (T,)
    avg_density: np.ndarray  # (T,)
    kinetic_energy: np.ndarray  # (T,)

    @property
    def dim(self) -> int:
        return self.final.shape[1]

    @property
    def target_config(self) -> dict | None:
        return self.summary.get("config", {}).get("target")


def _read_particles(path: Path, where: str) -> np.ndarray:
    header = path.open().readline().strip()
    columns = header.split(",")
    if not columns or any(not c.startswith("dim") for c in columns):
        raise BundleError(f"{where}: unexpected header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(columns):
        raise BundleError(f"{where}: {data.shape[1]} columns but header names {len(columns)}")
    return data


def _read_trace(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    header = path.open().readline().strip()
    if header != "iter,avg_density,kinetic_energy":
        raise BundleError(f"trace.csv: unexpected header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        return np.array([], dtype=int), np.array([]), np.array([])
    return data[:, 0].astype(int), data[:, 1], data[:, 2]


def load_bundle(run_dir: str | Path) -> Bundle:
    """Read the bundle files; any missing or malformed file is a hard error."""
    run_dir = Path(run_dir)
    needed = ["summary.json", "particles_final.csv", "particles_best.csv", "trace.csv"]
    missing = [name for name in needed if not (run_dir / name).is_file()]
    if missing:
        raise BundleError(f"{run_dir} is missing bundle files: {', '.join(missing)}")
    try:
        summary = json.loads((run_dir / "summary.json").read_text())
    except json.JSONDecodeError as exc:
        raise BundleError(f"summary.json does not parse: {exc}")
    if not isinstance(summary, dict) or "config" not in summary:
        raise BundleError("summary.json lacks the config echo")
    try:
        final = _read_particles(run_dir / "particles_final.csv", "particles_final.csv")
        best = _read_particles(run_dir / "particles_best.csv", "particles_best.csv")
        iters, avg_density, kinetic = _read_trace(run_dir / "trace.csv")
    except (ValueError, OSError) as exc:
        raise BundleError(f"bundle file does not parse: {exc}")
    if final.shape != best.shape:
        raise BundleError(f"particle files disagree on shape: {final.shape} vs {best.shape}")
    return Bundle(
        run_dir=run_dir,
        summary=summary,
        final=final,
        best=best,
        iterations=iters,
        avg_density=avg_density,
        kinetic_energy=kinetic,
    )
