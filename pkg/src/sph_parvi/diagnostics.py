"""Sample-quality diagnostics: histograms, KDE, moments, W1, mode occupancy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError
from .targets import TargetModel, marginal_cdf, marginal_cdf_antiderivative, marginal_mean

__all__ = [
    "histogram",
    "kde_1d",
    "silverman_bandwidth",
    "Moments",
    "moments",
    "w1_per_dim",
    "mode_occupancy",
]

# Width substituted when every sample in a histogram coincides.
DEGENERATE_WIDTH = 1e-9


def _samples_1d(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("need at least one sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    return x


def histogram(samples, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width histogram over [min, max] returning (edges, masses).

    Masses sum to 1; a degenerate range is widened by 1e-9 so a point mass
    still lands in a bin.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    x = _samples_1d(samples)
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        lo, hi = lo - 0.5 * DEGENERATE_WIDTH, lo + 0.5 * DEGENERATE_WIDTH
    edges = np.linspace(lo, hi, bins + 1)
    counts, edges = np.histogram(x, bins=edges)
    return edges, counts / x.size


def silverman_bandwidth(samples) -> float:
    """1.06 sigma M^(-1/5); falls back to 1e-3 (1 + |mean|) when sigma = 0."""
    x = _samples_1d(samples)
    sigma = float(x.std(ddof=1)) if x.size > 1 else 0.0
    if sigma > 0.0:
        return 1.06 * sigma * x.size ** (-0.2)
    return 1e-3 * (1.0 + abs(float(x.mean())))


def kde_1d(samples, grid, bandwidth: float | None = None) -> np.ndarray:
    """Gaussian kernel density estimate evaluated on grid.

    Uses the Silverman rule unless a bandwidth is given. Evaluation is
    chunked over the grid so large sample sets stay in modest memory.
    """
    x = _samples_1d(samples)
    grid = np.asarray(grid, dtype=float).ravel()
    bw = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if bw <= 0:
        raise ValueError(f"bandwidth must be positive, got {bw}")
    out = np.empty(grid.size)
    norm = 1.0 / (x.size * bw * np.sqrt(2.0 * np.pi))
    step = max(1, int(2**22 / max(x.size, 1)))
    for start in range(0, grid.size, step):
        z = (grid[start : start + step, None] - x[None, :]) / bw
        out[start : start + step] = norm * np.exp(-0.5 * z * z).sum(axis=1)
    return out


@dataclass(frozen=True)
class Moments:
    mean: np.ndarray
    var: np.ndarray
    degenerate: bool


def moments(samples) -> Moments:
    """Per-dimension mean and unbiased variance.

    A single sample has undefined variance; it is reported as 0 with the
    degenerate flag set.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"samples must be (M,) or (M, d), got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if x.shape[0] == 1:
        return Moments(mean=x[0].copy(), var=np.zeros(x.shape[1]), degenerate=True)
    return Moments(mean=x.mean(axis=0), var=x.var(axis=0, ddof=1), degenerate=False)


def _w1_1d(sorted_x: np.ndarray, target: TargetModel, dim_index: int) -> float:
    """Exact integral of |empirical CDF - marginal CDF| over the real line.

    Between consecutive order statistics the empirical CDF is the constant
    c = k/M while F is nondecreasing, so F - c changes sign at most once;
    the crossing is located by bisection and each piece integrates in
    closed form through G(x) = integral of F.
    """
    m = sorted_x.size

    def G(x):
        return marginal_cdf_antiderivative(target, dim_index, x)

    # Tails: integral of F below the sample range, of 1 - F above it.
    total = float(G(sorted_x[0]))
    total += float(marginal_mean(target, dim_index) - sorted_x[-1] + G(sorted_x[-1]))
    if m == 1:
        return total

    a, b = sorted_x[:-1], sorted_x[1:]
    c = np.arange(1, m) / m
    fa = marginal_cdf(target, dim_index, a)
    fb = marginal_cdf(target, dim_index, b)
    ga = G(a)
    gb = G(b)

    above = fa >= c  # F >= c on the whole segment
    below = fb <= c  # F <= c on the whole segment
    crossing = ~(above | below)
    seg = np.where(above, (gb - ga) - c * (b - a), c * (b - a) - (gb - ga))

    if crossing.any():
        lo, hi = a[crossing].copy(), b[crossing].copy()
        cc = c[crossing]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            high_side = marginal_cdf(target, dim_index, mid) >= cc
            hi = np.where(high_side, mid, hi)
            lo = np.where(high_side, lo, mid)
            if np.max(hi - lo) <= 1e-15 * (1.0 + np.max(np.abs(sorted_x))):
                break
        xs = 0.5 * (lo + hi)
        seg_cross = cc * (2.0 * xs - a[crossing] - b[crossing]) + ga[crossing] + gb[crossing] - 2.0 * G(xs)
        seg = np.where(crossing, 0.0, seg)
        total += float(seg_cross.sum())
    return total + float(seg.sum())


def w1_per_dim(positions, target: TargetModel) -> np.ndarray:
    """Wasserstein-1 distance between each coordinate's empirical law and
    the target's analytic marginal."""
    x = np.asarray(positions, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if not target.has_analytic_marginals:
        raise CapabilityError("w1_per_dim needs a target with analytic marginals")
    if x.ndim != 2 or x.shape[1] != target.dim:
        raise ValueError(f"positions must be (M, {target.dim}), got shape {np.shape(positions)}")
    return np.array([_w1_1d(np.sort(x[:, k]), target, k) for k in range(target.dim)])


def mode_occupancy(positions, target: TargetModel, radius_multiplier: float = 3.0) -> np.ndarray:
    """Fraction of particles within reach of each mixture component.

    Each particle is assigned to its nearest component in per-dimension
    standardized (diagonal Mahalanobis) distance and counted when that
    distance is at most radius_multiplier; fractions therefore sum to <= 1.
    """
    if not target.has_analytic_marginals:
        raise CapabilityError("mode_occupancy needs a mixture-form target")
    if radius_multiplier <= 0:
        raise ValueError(f"radius_multiplier must be positive, got {radius_multiplier}")
    x = np.asarray(positions, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] != target.dim:
        raise ValueError(f"positions must be (M, {target.dim}), got shape {np.shape(positions)}")
    z2 = ((x[:, None, :] - target.means[None, :, :]) ** 2 / target.variances[None, :, :]).sum(axis=2)
    nearest = np.argmin(z2, axis=1)
    within = np.sqrt(z2[np.arange(x.shape[0]), nearest]) <= radius_multiplier
    k = target.weights.size
    return np.bincount(nearest[within], minlength=k).astype(float) / x.shape[0]
