"""Particle state, fluid parameters, and the pairwise cache."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .kernels import KernelSpec

__all__ = [
    "ParticleSystem",
    "FluidParams",
    "PairwiseCache",
    "ViscosityMode",
    "SamplingMode",
    "PressureVariant",
    "ForceVariant",
]


class ViscosityMode(str, enum.Enum):
    LAPLACIAN_KERNEL = "laplacian_kernel"
    LAPLACIAN_SYMMETRIC = "laplacian_symmetric"
    LINEAR_ARTIFICIAL = "linear_artificial"


class SamplingMode(str, enum.Enum):
    EXTERNAL_PRESSURE = "external_pressure"
    EXTERNAL_FORCE = "external_force"


class PressureVariant(str, enum.Enum):
    RECIPROCAL = "reciprocal"
    NEG_LOG = "neg_log"


class ForceVariant(str, enum.Enum):
    SCORE = "score"
    DENSITY_GRADIENT = "density_gradient"


def _parse_enum(cls, value, label):
    if isinstance(value, cls):
        return value
    try:
        return cls(value)
    except ValueError:
        valid = ", ".join(m.value for m in cls)
        raise ConfigurationError(f"unknown {label} {value!r} (expected one of: {valid})")


def _as_matrix(name: str, arr, m: int | None, d: int | None) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=float)
    if out.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {out.shape}")
    if m is not None and out.shape[0] != m:
        raise ValueError(f"{name} must have {m} rows, got {out.shape[0]}")
    if d is not None and out.shape[1] != d:
        raise ValueError(f"{name} must have {d} columns, got {out.shape[1]}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    return out


@dataclass(frozen=True)
class ParticleSystem:
    """Immutable particle state; updates create new instances.

    positions and velocities are (M, d), densities and masses (M,).
    Densities and masses must be strictly positive and everything finite.
    """

    positions: np.ndarray
    velocities: np.ndarray
    densities: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pos = _as_matrix("positions", self.positions, None, None)
        m, d = pos.shape
        if m < 1 or d < 1 or d > 3:
            raise ValueError(f"positions must be (M>=1, 1<=d<=3), got {pos.shape}")
        vel = _as_matrix("velocities", self.velocities, m, d)
        rho = np.ascontiguousarray(self.densities, dtype=float)
        mass = np.ascontiguousarray(self.masses, dtype=float)
        for name, vec in (("densities", rho), ("masses", mass)):
            if vec.shape != (m,):
                raise ValueError(f"{name} must have shape ({m},), got {vec.shape}")
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"{name} contains non-finite values")
            if np.any(vec <= 0):
                raise ValueError(f"{name} must be strictly positive")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)
        object.__setattr__(self, "densities", rho)
        object.__setattr__(self, "masses", mass)

    @property
    def M(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def with_state(self, *, positions=None, velocities=None, densities=None) -> "ParticleSystem":
        return replace(
            self,
            positions=self.positions if positions is None else positions,
            velocities=self.velocities if velocities is None else velocities,
            densities=self.densities if densities is None else densities,
        )


@dataclass(frozen=True)
class FluidParams:
    """Fluid constants for the sampler dynamics.

    c0 is the artificial sound speed, rho0 the reference density of the
    equation of state. alpha_scale multiplies the target coupling (the score
    force or the external pressure field). rho_min defaults to 1e-6 * rho0
    and floors every density estimate.
    """

    c0: float = 1.0
    rho0: float = 1.0
    gamma: float = 1.0
    viscosity_mode: ViscosityMode = ViscosityMode.LINEAR_ARTIFICIAL
    mu: float = 0.0
    visc_alpha: float = 0.1
    a_d: float = 0.1
    alpha_scale: float = 1.0
    eps_p: float = 1e-12
    eps_sing: float = 0.01
    gravity: tuple[float, ...] | None = None
    regularization: bool = False
    rho_min: float | None = None
    internal_pressure_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "viscosity_mode", _parse_enum(ViscosityMode, self.viscosity_mode, "viscosity_mode"))
        checks = [
            ("c0", self.c0, self.c0 > 0),
            ("rho0", self.rho0, self.rho0 > 0),
            ("gamma", self.gamma, self.gamma >= 1.0),
            ("mu", self.mu, self.mu >= 0),
            ("visc_alpha", self.visc_alpha, 0.08 <= self.visc_alpha <= 0.5),
            ("a_d", self.a_d, self.a_d >= 0),
            ("alpha_scale", self.alpha_scale, self.alpha_scale > 0),
            ("eps_p", self.eps_p, self.eps_p > 0),
            ("eps_sing", self.eps_sing, self.eps_sing > 0),
            ("internal_pressure_weight", self.internal_pressure_weight, self.internal_pressure_weight >= 0),
        ]
        for name, value, ok in checks:
            if not (isinstance(value, (int, float)) and math.isfinite(value) and ok):
                raise ConfigurationError(f"fluid parameter {name}={value!r} is outside its valid range")
        if self.rho_min is None:
            object.__setattr__(self, "rho_min", 1e-6 * self.rho0)
        elif not (math.isfinite(self.rho_min) and self.rho_min > 0):
            raise ConfigurationError(f"fluid parameter rho_min={self.rho_min!r} must be positive")
        if self.gravity is not None:
            g = tuple(float(v) for v in np.asarray(self.gravity, dtype=float).ravel())
            if not all(math.isfinite(v) for v in g):
                raise ConfigurationError("gravity must be finite")
            object.__setattr__(self, "gravity", g)


@dataclass(frozen=True)
class PairwiseCache:
    """All-pairs geometry and kernel terms for one particle configuration.

    distances and kernel_values are (M, M) with zero diagonals;
    kernel_grads is (M, M, d) with kernel_grads[i, j] the gradient of
    K(|r_i - r_j|) with respect to r_i, antisymmetric in (i, j).
    """

    spec: KernelSpec
    distances: np.ndarray
    kernel_values: np.ndarray
    kernel_grads: np.ndarray
    laplacians: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def M(self) -> int:
        return self.distances.shape[0]
