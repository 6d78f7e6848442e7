"""Target distributions the sampler draws from.

A target exposes up to two capabilities on batches of positions: log-density
and score (gradient of log-density). Built-in constructors cover diagonal
Gaussians and finite mixtures of them; those also carry their component
parameters so diagnostics can use analytic marginals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import log_softmax, logsumexp, ndtr

from .errors import CapabilityError, ConfigurationError

__all__ = [
    "TargetModel",
    "gaussian_target",
    "mixture_target",
    "target_from_config",
    "query_density",
    "query_score",
    "check_score",
    "marginal_pdf",
    "marginal_cdf",
    "marginal_cdf_antiderivative",
    "marginal_mean",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class TargetModel:
    """A sampling target with optional capabilities.

    log_density and score map (M, dim) position batches to (M,) and
    (M, dim) arrays. weights/means/variances describe the Gaussian-mixture
    form when the target has one (used by analytic diagnostics) and are
    None for custom targets.
    """

    dim: int
    log_density: Callable[[np.ndarray], np.ndarray] | None = None
    score: Callable[[np.ndarray], np.ndarray] | None = None
    description: str = ""
    weights: np.ndarray | None = field(default=None, repr=False)
    means: np.ndarray | None = field(default=None, repr=False)
    variances: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"target dim must be >= 1, got {self.dim}")
        if self.log_density is None and self.score is None:
            raise ConfigurationError("a target needs at least one of log_density, score")

    @property
    def has_analytic_marginals(self) -> bool:
        return self.weights is not None


def _positions_batch(target_dim: int, positions: np.ndarray) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)
    squeeze = pos.ndim == 1
    if squeeze:
        pos = pos[None, :]
    if pos.ndim != 2 or pos.shape[1] != target_dim:
        raise ValueError(f"positions must be (M, {target_dim}), got shape {np.shape(positions)}")
    return pos


def _validate_components(weights, means, variances):
    w = np.asarray(weights, dtype=float)
    m = np.atleast_2d(np.asarray(means, dtype=float))
    v = np.atleast_2d(np.asarray(variances, dtype=float))
    if w.ndim != 1 or w.size < 1:
        raise ConfigurationError("mixture weights must be a nonempty vector")
    if m.shape[0] != w.size or v.shape != m.shape:
        raise ConfigurationError("mixture weights, means, and variances must agree in shape")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ConfigurationError("mixture weights must be finite and positive")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ConfigurationError(f"mixture weights must sum to 1, got {w.sum()!r}")
    if not np.all(np.isfinite(m)):
        raise ConfigurationError("mixture means must be finite")
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise ConfigurationError("mixture variances must be finite and positive")
    return w / w.sum(), m, v


def mixture_target(components, description: str = "") -> TargetModel:
    """Finite mixture of diagonal Gaussians.

    components is a sequence of (weight, mean, diag_variance) triples;
    weights must be positive and sum to 1.
    """
    if not components:
        raise ConfigurationError("mixture needs at least one component")
    weights, means, variances = _validate_components(
        [c[0] for c in components],
        [np.atleast_1d(c[1]) for c in components],
        [np.atleast_1d(c[2]) for c in components],
    )
    dim = means.shape[1]
    log_w = np.log(weights)

    def component_logs(pos: np.ndarray) -> np.ndarray:
        # (M, K): log w_k + sum_d log N(x_d; m_kd, v_kd)
        z2 = (pos[:, None, :] - means[None, :, :]) ** 2 / variances[None, :, :]
        comp = -0.5 * (z2 + np.log(variances)[None, :, :] + _LOG_2PI).sum(axis=2)
        return log_w[None, :] + comp

    def log_density(positions: np.ndarray) -> np.ndarray:
        pos = _positions_batch(dim, positions)
        return logsumexp(component_logs(pos), axis=1)

    def score(positions: np.ndarray) -> np.ndarray:
        pos = _positions_batch(dim, positions)
        resp = np.exp(log_softmax(component_logs(pos), axis=1))
        comp_scores = (means[None, :, :] - pos[:, None, :]) / variances[None, :, :]
        return np.einsum("mk,mkd->md", resp, comp_scores)

    if not description:
        description = f"mixture of {weights.size} diagonal Gaussians in {dim}d"
    return TargetModel(
        dim=dim,
        log_density=log_density,
        score=score,
        description=description,
        weights=weights,
        means=means,
        variances=variances,
    )


def gaussian_target(mean, diag_cov, description: str = "") -> TargetModel:
    """Diagonal Gaussian target."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    var = np.atleast_1d(np.asarray(diag_cov, dtype=float))
    if not description:
        description = f"diagonal Gaussian in {mean.size}d"
    return mixture_target([(1.0, mean, var)], description=description)


def target_from_config(cfg: dict) -> TargetModel:
    """Build a target from its config mapping.

    {"type": "gaussian", "mean": [...], "var": [...]} or
    {"type": "mixture", "components": [{"weight": w, "mean": [...], "var": [...]}, ...]}
    """
    if not isinstance(cfg, dict):
        raise ConfigurationError("target config must be a mapping")
    kind = cfg.get("type")
    if kind == "gaussian":
        unknown = set(cfg) - {"type", "mean", "var"}
        if unknown:
            raise ConfigurationError(f"unknown target keys: {sorted(unknown)}")
        if "mean" not in cfg or "var" not in cfg:
            raise ConfigurationError("gaussian target requires 'mean' and 'var'")
        return gaussian_target(cfg["mean"], cfg["var"])
    if kind == "mixture":
        unknown = set(cfg) - {"type", "components"}
        if unknown:
            raise ConfigurationError(f"unknown target keys: {sorted(unknown)}")
        comps = cfg.get("components")
        if not isinstance(comps, list) or not comps:
            raise ConfigurationError("mixture target requires a nonempty 'components' list")
        triples = []
        for comp in comps:
            unknown = set(comp) - {"weight", "mean", "var"}
            if unknown:
                raise ConfigurationError(f"unknown mixture component keys: {sorted(unknown)}")
            try:
                triples.append((comp["weight"], comp["mean"], comp["var"]))
            except KeyError as exc:
                raise ConfigurationError(f"mixture component missing key {exc}")
        return mixture_target(triples)
    raise ConfigurationError(f"unknown target type {kind!r} (expected 'gaussian' or 'mixture')")


def query_density(target: TargetModel, positions: np.ndarray, log_shift: float = 0.0) -> np.ndarray:
    """p(r) = exp(log_density(r) - log_shift); the shift guards overflow."""
    if target.log_density is None:
        raise CapabilityError("target does not provide log_density")
    pos = _positions_batch(target.dim, positions)
    logp = np.asarray(target.log_density(pos), dtype=float)
    return np.exp(logp - log_shift)


def query_score(target: TargetModel, positions: np.ndarray) -> np.ndarray:
    if target.score is None:
        raise CapabilityError("target does not provide score")
    pos = _positions_batch(target.dim, positions)
    return np.asarray(target.score(pos), dtype=float)


def check_score(target: TargetModel, n_probes: int = 32, seed: int = 0, step: float = 1e-6) -> float:
    """Max abs difference between score and central differences of log_density.

    A quick self-consistency check used by the CLI selftest; needs both
    capabilities.
    """
    if target.log_density is None or target.score is None:
        raise CapabilityError("score check needs both log_density and score")
    rng = np.random.default_rng(seed)
    probes = rng.normal(0.0, 1.5, size=(n_probes, target.dim))
    if target.means is not None:
        probes = probes + target.means.mean(axis=0)[None, :]
    analytic = query_score(target, probes)
    fd = np.empty_like(analytic)
    for k in range(target.dim):
        shift = np.zeros(target.dim)
        shift[k] = step
        hi = np.asarray(target.log_density(probes + shift))
        lo = np.asarray(target.log_density(probes - shift))
        fd[:, k] = (hi - lo) / (2.0 * step)
    return float(np.max(np.abs(analytic - fd)))


def _require_marginals(target: TargetModel, dim_index: int):
    if not target.has_analytic_marginals:
        raise CapabilityError("target does not carry analytic mixture marginals")
    if not 0 <= dim_index < target.dim:
        raise ValueError(f"dim_index must be in [0, {target.dim}), got {dim_index}")
    mu = target.means[:, dim_index]
    sd = np.sqrt(target.variances[:, dim_index])
    return target.weights, mu, sd


def _phi(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)


def marginal_pdf(target: TargetModel, dim_index: int, x) -> np.ndarray:
    w, mu, sd = _require_marginals(target, dim_index)
    z = (np.asarray(x, dtype=float)[..., None] - mu) / sd
    return (_phi(z) / sd * w).sum(axis=-1)


def marginal_cdf(target: TargetModel, dim_index: int, x) -> np.ndarray:
    w, mu, sd = _require_marginals(target, dim_index)
    z = (np.asarray(x, dtype=float)[..., None] - mu) / sd
    return (ndtr(z) * w).sum(axis=-1)


def marginal_cdf_antiderivative(target: TargetModel, dim_index: int, x) -> np.ndarray:
    """G(x) = integral of the marginal CDF from -inf to x.

    For a Gaussian mixture, G(x) = sum_k w_k sd_k [phi(z_k) + z_k Phi(z_k)]
    with z_k = (x - mu_k)/sd_k; G(x) -> 0 as x -> -inf and
    G(x) -> x - mean as x -> +inf.
    """
    w, mu, sd = _require_marginals(target, dim_index)
    z = (np.asarray(x, dtype=float)[..., None] - mu) / sd
    return (sd * (_phi(z) + z * ndtr(z)) * w).sum(axis=-1)


def marginal_mean(target: TargetModel, dim_index: int) -> float:
    w, mu, _ = _require_marginals(target, dim_index)
    return float(np.dot(w, mu))
