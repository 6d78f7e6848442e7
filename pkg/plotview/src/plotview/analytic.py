"""Target densities reconstructed from the config echo.

The echo's target block describes a diagonal Gaussian or a mixture of
them; these helpers evaluate its marginals and 2D joint density directly
from those numbers.
"""

from __future__ import annotations

import math

import numpy as np

from .bundle import BundleError

__all__ = ["target_components", "marginal_pdf", "joint_density_2d"]


def target_components(target_cfg: dict) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Normalize the echoed target block into (weight, mean, var) triples."""
    if not isinstance(target_cfg, dict):
        raise BundleError("config echo has no usable target block")
    kind = target_cfg.get("type")
    if kind == "gaussian":
        return [(1.0, np.asarray(target_cfg["mean"], float), np.asarray(target_cfg["var"], float))]
    if kind == "mixture":
        comps = target_cfg.get("components", [])
        if not comps:
            raise BundleError("mixture target echo has no components")
        return [
            (float(c["weight"]), np.asarray(c["mean"], float), np.asarray(c["var"], float))
            for c in comps
        ]
    raise BundleError(f"unknown target type {kind!r} in config echo")


def marginal_pdf(components, dim_index: int, x: np.ndarray) -> np.ndarray:
    """Weighted sum of normal pdfs along one coordinate."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for weight, mean, var in components:
        m, v = float(mean[dim_index]), float(var[dim_index])
        out += weight * np.exp(-0.5 * (x - m) ** 2 / v) / math.sqrt(2.0 * math.pi * v)
    return out


def joint_density_2d(components, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Density on a 2D meshgrid for diagonal-covariance components."""
    out = np.zeros_like(gx)
    for weight, mean, var in components:
        zx = (gx - mean[0]) ** 2 / var[0]
        zy = (gy - mean[1]) ** 2 / var[1]
        norm = 2.0 * math.pi * math.sqrt(var[0] * var[1])
        out += weight * np.exp(-0.5 * (zx + zy)) / norm
    return out
