"""Figure data assembly and rendering.

Every plotted array is assembled by one of the *_data functions from the
bundle files (plus the analytic target reconstructed from the config
echo); tests assert on those arrays, and the drawing layer below only
styles them. matplotlib runs on the Agg backend so no display is needed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analytic import joint_density_2d, marginal_pdf, target_components
from .bundle import Bundle, BundleError, load_bundle

__all__ = ["PlotRequest", "render", "scatter_data", "marginals_data", "traces_data"]

SUPPORTED_PLOTS = ("scatter", "marginals", "traces")


@dataclass(frozen=True)
class PlotRequest:
    run_dir: Path
    plots: tuple[str, ...] = SUPPORTED_PLOTS
    fmt: str = "png"
    grid: int = 200
    out_dir: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "run_dir", Path(self.run_dir))
        object.__setattr__(self, "plots", tuple(self.plots))
        unknown = set(self.plots) - set(SUPPORTED_PLOTS)
        if unknown or not self.plots:
            raise ValueError(f"plots must be a nonempty subset of {SUPPORTED_PLOTS}, got {self.plots}")
        if self.fmt not in ("png", "svg"):
            raise ValueError(f"fmt must be png or svg, got {self.fmt!r}")
        if self.grid < 2:
            raise ValueError(f"grid resolution must be >= 2, got {self.grid}")
        object.__setattr__(self, "out_dir", Path(self.out_dir) if self.out_dir else self.run_dir / "plots")


# ------------------------------------------------------------ data builders

def traces_data(bundle: Bundle) -> dict:
    """Trace series exactly as recorded, one point per completed iteration."""
    return {
        "iterations": bundle.iterations,
        "avg_density": bundle.avg_density,
        "kinetic_energy": bundle.kinetic_energy,
    }


def _cloud_kde(bundle: Bundle, cloud: str, k: int) -> dict | None:
    block = bundle.summary.get("diagnostics", {}).get(cloud, {})
    kde = block.get("kde") or []
    if k >= len(kde):
        return None
    return {"grid": np.asarray(kde[k]["grid"], float), "density": np.asarray(kde[k]["density"], float)}


def marginals_data(bundle: Bundle) -> list[dict]:
    """Per-dimension KDE curves from the summary plus the analytic marginal.

    The KDE arrays are read verbatim from the bundle; only the analytic
    curve is evaluated here, from the echoed target parameters.
    """
    try:
        components = target_components(bundle.target_config)
    except BundleError:
        components = None
    out = []
    for k in range(bundle.dim):
        clouds = {}
        for name in ("final", "best"):
            curve = _cloud_kde(bundle, name, k)
            if curve is not None:
                clouds[name] = curve
        lo_parts = [c["grid"][0] for c in clouds.values()] or [float(bundle.final[:, k].min())]
        hi_parts = [c["grid"][-1] for c in clouds.values()] or [float(bundle.final[:, k].max())]
        analytic = None
        if components is not None:
            grid = np.linspace(min(lo_parts), max(hi_parts), 512)
            analytic = {"grid": grid, "density": marginal_pdf(components, k, grid)}
        out.append({"dim": k, "clouds": clouds, "analytic": analytic})
    return out


def scatter_data(bundle: Bundle, resolution: int) -> dict | None:
    """Particle clouds plus a target-density contour grid; 2D runs only."""
    if bundle.dim != 2:
        return None
    components = target_components(bundle.target_config)
    pts = np.vstack([bundle.final, bundle.best])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    for _, mean, var in components:
        lo = np.minimum(lo, mean - 3.0 * np.sqrt(var))
        hi = np.maximum(hi, mean + 3.0 * np.sqrt(var))
    pad = 0.05 * (hi - lo)
    gx, gy = np.meshgrid(
        np.linspace(lo[0] - pad[0], hi[0] + pad[0], resolution),
        np.linspace(lo[1] - pad[1], hi[1] + pad[1], resolution),
    )
    return {
        "grid_x": gx,
        "grid_y": gy,
        "density": joint_density_2d(components, gx, gy),
        "final": bundle.final,
        "best": bundle.best,
    }


# ----------------------------------------------------------------- drawing

def _draw_traces(data: dict, path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax1.plot(data["iterations"], data["avg_density"], marker="o", markersize=2.5, lw=1)
    ax1.set_ylabel("avg density")
    ax2.plot(data["iterations"], data["kinetic_energy"], marker="o", markersize=2.5, lw=1, color="tab:orange")
    ax2.set_ylabel("kinetic energy")
    ax2.set_xlabel("iteration")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _draw_marginals(data: list[dict], path: Path) -> None:
    n = len(data)
    fig, axes = plt.subplots(1, n, figsize=(5.5 * n, 4), squeeze=False)
    for ax, entry in zip(axes[0], data):
        for name, style in (("final", "-"), ("best", "--")):
            curve = entry["clouds"].get(name)
            if curve is not None:
                ax.plot(curve["grid"], curve["density"], style, label=f"{name} KDE")
        if entry["analytic"] is not None:
            ax.plot(entry["analytic"]["grid"], entry["analytic"]["density"], ":", color="k", label="target")
        ax.set_xlabel(f"dim {entry['dim']}")
        ax.set_ylabel("density")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _draw_scatter(data: dict, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.contour(data["grid_x"], data["grid_y"], data["density"], levels=8, cmap="viridis", alpha=0.8)
    ax.scatter(data["final"][:, 0], data["final"][:, 1], s=6, alpha=0.5, label="final")
    ax.scatter(data["best"][:, 0], data["best"][:, 1], s=6, alpha=0.5, marker="x", label="best")
    ax.set_xlabel("dim 0")
    ax.set_ylabel("dim 1")
    ax.set_aspect("equal")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render(request: PlotRequest) -> list[Path]:
    """Write the requested figures; returns the paths actually written.

    A scatter request on a run with d != 2 is skipped with a warning; all
    other problems (missing files, malformed bundle) raise BundleError.
    """
    bundle = load_bundle(request.run_dir)
    request.out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for plot in request.plots:
        path = request.out_dir / f"{plot}.{request.fmt}"
        if plot == "traces":
            _draw_traces(traces_data(bundle), path)
        elif plot == "marginals":
            _draw_marginals(marginals_data(bundle), path)
        else:
            data = scatter_data(bundle, request.grid)
            if data is None:
                warnings.warn(f"scatter skipped: run is {bundle.dim}D, need 2D", stacklevel=2)
                continue
            _draw_scatter(data, path)
        written.append(path)
    return written
