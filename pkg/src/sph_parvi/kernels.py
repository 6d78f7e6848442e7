"""Smoothing kernels and their derivatives.

Four radially symmetric kernels are provided, each defined on a compact
support and usable in 1, 2, or 3 dimensions:

``poly6``         c * (h^2 - r^2)^3            for r < h
``spiky``         c * (h - r)^3                for r < h
``viscosity``     -r^3/(2h^3) + r^2/h^2 + h/(2r) - 1   for r < h
``cubic_spline``  sigma * f(r/h), f(q) = 1 - 1.5q^2 + 0.75q^3 on [0,1],
                  0.25(2-q)^3 on (1,2], support 2h

The poly6, spiky, and cubic spline constants normalize the kernel to unit
integral over its d-dimensional support.  The viscosity kernel is used only
as a shape for velocity diffusion and is deliberately left unnormalized
(its constant is 1); it is also clamped to zero at r <= 1e-12 h because the
h/(2r) term diverges at the origin.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import ConfigurationError

__all__ = [
    "KernelKind",
    "KernelSpec",
    "make_kernel",
    "support_radius",
    "normalization_constant",
    "kernel_value",
    "kernel_radial_derivative",
    "kernel_grad",
    "kernel_laplacian",
]

# Radius below which the viscosity kernel and its derivatives are defined as 0.
VISCOSITY_CLAMP = 1e-12


class KernelKind(str, enum.Enum):
    POLY6 = "poly6"
    SPIKY = "spiky"
    VISCOSITY = "viscosity"
    CUBIC_SPLINE = "cubic_spline"

    @classmethod
    def parse(cls, name: str) -> "KernelKind":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ConfigurationError(f"unknown kernel kind {name!r} (expected one of: {valid})")


# Support radius in units of h.
_SUPPORT_FACTOR = {
    KernelKind.POLY6: 1.0,
    KernelKind.SPIKY: 1.0,
    KernelKind.VISCOSITY: 1.0,
    KernelKind.CUBIC_SPLINE: 2.0,
}

# Power p such that the normalization constant scales as h^(-p) when the
# profile is written at h = 1: poly6's (h^2-r^2)^3 contributes h^6, spiky's
# (h-r)^3 contributes h^3, the cubic spline profile is already dimensionless
# in q = r/h, and each integral carries h^dim from the volume element.
_H_POWER_OFFSET = {
    KernelKind.POLY6: 6,
    KernelKind.SPIKY: 3,
    KernelKind.CUBIC_SPLINE: 0,
}


@dataclass(frozen=True)
class KernelSpec:
    """A kernel kind bound to a dimension and smoothing length."""

    kind: KernelKind
    dim: int
    h: float
    normalization: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigurationError(f"kernel dim must be 1, 2, or 3, got {self.dim}")
        if not (isinstance(self.h, (int, float)) and math.isfinite(self.h) and self.h > 0):
            raise ConfigurationError(f"kernel smoothing length must be positive, got {self.h}")


def make_kernel(kind: KernelKind | str, dim: int, h: float) -> KernelSpec:
    kind = KernelKind.parse(kind) if isinstance(kind, str) else kind
    if dim not in (1, 2, 3):
        raise ConfigurationError(f"kernel dim must be 1, 2, or 3, got {dim}")
    if not (math.isfinite(h) and h > 0):
        raise ConfigurationError(f"kernel smoothing length must be positive, got {h}")
    return KernelSpec(kind=kind, dim=dim, h=float(h), normalization=normalization_constant(kind, dim, h))


def support_radius(spec: KernelSpec) -> float:
    """Radius beyond which the kernel and all its derivatives vanish."""
    return _SUPPORT_FACTOR[spec.kind] * spec.h


def _profile_unit_h(kind: KernelKind, r: np.ndarray) -> np.ndarray:
    """Unnormalized kernel profile at h = 1, zero outside support."""
    r = np.asarray(r, dtype=float)
    if kind is KernelKind.POLY6:
        return np.where(r < 1.0, (1.0 - r * r) ** 3, 0.0)
    if kind is KernelKind.SPIKY:
        return np.where(r < 1.0, (1.0 - r) ** 3, 0.0)
    if kind is KernelKind.CUBIC_SPLINE:
        near = 1.0 - 1.5 * r * r + 0.75 * r * r * r
        far = 0.25 * (2.0 - r) ** 3
        return np.where(r <= 1.0, near, np.where(r < 2.0, far, 0.0))
    raise ConfigurationError(f"no normalizable profile for kernel kind {kind}")


# Surface area of the unit sphere in d dimensions, for the radial volume element.
_UNIT_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


@lru_cache(maxsize=None)
def _unit_norm_constant(kind: KernelKind, dim: int) -> float:
    """Normalization constant at h = 1 for kinds without a hard-coded form.

    Integrates the radial profile against the d-dimensional volume element
    with adaptive quadrature; the result is cached per (kind, dim).
    """
    support = _SUPPORT_FACTOR[kind]
    integral, _ = quad(lambda r: float(_profile_unit_h(kind, r)) * r ** (dim - 1), 0.0, support, limit=200)
    return 1.0 / (_UNIT_SPHERE_AREA[dim] * integral)


def normalization_constant(kind: KernelKind | str, dim: int, h: float) -> float:
    """Constant c such that c * profile(r, h) integrates to 1 over R^dim.

    Exact closed forms are used where standard (poly6 3D, spiky 3D, cubic
    spline in every dimension); remaining combinations are normalized by
    quadrature of the profile at h = 1 and rescaled analytically in h.
    The viscosity kernel is shape-only and returns 1.
    """
    kind = KernelKind.parse(kind) if isinstance(kind, str) else kind
    if dim not in (1, 2, 3):
        raise ConfigurationError(f"kernel dim must be 1, 2, or 3, got {dim}")
    if not (math.isfinite(h) and h > 0):
        raise ConfigurationError(f"kernel smoothing length must be positive, got {h}")
    if kind is KernelKind.VISCOSITY:
        return 1.0
    if kind is KernelKind.POLY6 and dim == 3:
        return 315.0 / (64.0 * math.pi * h**9)
    if kind is KernelKind.SPIKY and dim == 3:
        return 15.0 / (math.pi * h**6)
    if kind is KernelKind.CUBIC_SPLINE:
        # Standard sigma_d: 2/(3h), 10/(7 pi h^2), 1/(pi h^3).
        if dim == 1:
            return 2.0 / (3.0 * h)
        if dim == 2:
            return 10.0 / (7.0 * math.pi * h * h)
        return 1.0 / (math.pi * h**3)
    return _unit_norm_constant(kind, dim) / h ** (_H_POWER_OFFSET[kind] + dim)


def _as_radii(r) -> tuple[np.ndarray, bool]:
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValueError("kernel radius must be nonnegative")
    return arr, arr.ndim == 0


def _maybe_scalar(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def kernel_value(spec: KernelSpec, r) -> float | np.ndarray:
    """K(r, h). Accepts a scalar or array of nonnegative radii."""
    r, scalar = _as_radii(r)
    h = spec.h
    c = spec.normalization
    if spec.kind is KernelKind.POLY6:
        out = np.where(r < h, c * (h * h - r * r) ** 3, 0.0)
    elif spec.kind is KernelKind.SPIKY:
        out = np.where(r < h, c * (h - r) ** 3, 0.0)
    elif spec.kind is KernelKind.VISCOSITY:
        safe = np.where(r > 0, r, 1.0)
        val = -(r**3) / (2.0 * h**3) + (r * r) / (h * h) + h / (2.0 * safe) - 1.0
        out = np.where((r > VISCOSITY_CLAMP * h) & (r < h), c * val, 0.0)
    else:
        q = r / h
        sigma = spec.normalization
        near = 1.0 - 1.5 * q * q + 0.75 * q * q * q
        far = 0.25 * np.maximum(2.0 - q, 0.0) ** 3
        out = sigma * np.where(q <= 1.0, near, np.where(q < 2.0, far, 0.0))
    return _maybe_scalar(out, scalar)


def kernel_radial_derivative(spec: KernelSpec, r) -> float | np.ndarray:
    """dK/dr as a signed scalar, zero outside the support."""
    r, scalar = _as_radii(r)
    h = spec.h
    c = spec.normalization
    if spec.kind is KernelKind.POLY6:
        out = np.where(r < h, -6.0 * c * r * (h * h - r * r) ** 2, 0.0)
    elif spec.kind is KernelKind.SPIKY:
        out = np.where(r < h, -3.0 * c * (h - r) ** 2, 0.0)
    elif spec.kind is KernelKind.VISCOSITY:
        safe = np.where(r > 0, r, 1.0)
        val = -3.0 * r * r / (2.0 * h**3) + 2.0 * r / (h * h) - h / (2.0 * safe * safe)
        out = np.where((r > VISCOSITY_CLAMP * h) & (r < h), c * val, 0.0)
    else:
        q = r / h
        sigma = spec.normalization
        near = -3.0 * q + 2.25 * q * q
        far = -0.75 * np.maximum(2.0 - q, 0.0) ** 2
        out = (sigma / h) * np.where(q <= 1.0, near, np.where(q < 2.0, far, 0.0))
    return _maybe_scalar(out, scalar)


def kernel_grad(spec: KernelSpec, r_i: np.ndarray, r_j: np.ndarray) -> np.ndarray:
    """Gradient of K(|r_i - r_j|, h) with respect to r_i.

    Equal to dK/dr * (r_i - r_j)/|r_i - r_j|; defined as the zero vector for
    coincident particles so self terms drop out of force sums.
    """
    r_i = np.asarray(r_i, dtype=float)
    r_j = np.asarray(r_j, dtype=float)
    if r_i.shape != (spec.dim,) or r_j.shape != (spec.dim,):
        raise ValueError(f"positions must have shape ({spec.dim},)")
    diff = r_i - r_j
    r = float(np.sqrt(np.dot(diff, diff)))
    if r == 0.0:
        return np.zeros(spec.dim)
    return (kernel_radial_derivative(spec, r) / r) * diff


def _radial_second_derivative(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    h = spec.h
    c = spec.normalization
    if spec.kind is KernelKind.POLY6:
        return np.where(r < h, -6.0 * c * (h * h - r * r) * (h * h - 5.0 * r * r), 0.0)
    if spec.kind is KernelKind.SPIKY:
        return np.where(r < h, 6.0 * c * (h - r), 0.0)
    if spec.kind is KernelKind.VISCOSITY:
        safe = np.where(r > 0, r, 1.0)
        val = -3.0 * r / h**3 + 2.0 / (h * h) + h / safe**3
        return np.where((r > VISCOSITY_CLAMP * h) & (r < h), c * val, 0.0)
    q = r / h
    sigma = spec.normalization
    near = -3.0 + 4.5 * q
    far = 1.5 * np.maximum(2.0 - q, 0.0)
    return (sigma / (h * h)) * np.where(q <= 1.0, near, np.where(q < 2.0, far, 0.0))


def kernel_laplacian(spec: KernelSpec, r) -> float | np.ndarray:
    """Radial Laplacian d2K/dr2 + (dim-1)/r * dK/dr, zero outside support.

    At r = 0 the finite analytic limits are returned for poly6 and the cubic
    spline; the spiky limit diverges for dim >= 2 and is defined as 0 (the
    same coincident-particle convention as the gradient), while the clamped
    viscosity kernel is 0 there by construction.
    """
    r, scalar = _as_radii(r)
    h = spec.h
    c = spec.normalization
    d2 = _radial_second_derivative(spec, r)
    safe = np.where(r > 0, r, 1.0)
    first = kernel_radial_derivative(spec, r) / safe
    out = np.asarray(d2 + (spec.dim - 1) * first, dtype=float)

    at_zero = r == 0.0
    if np.any(at_zero):
        if spec.kind is KernelKind.POLY6:
            limit = -6.0 * c * h**4 * spec.dim
        elif spec.kind is KernelKind.CUBIC_SPLINE:
            limit = -3.0 * spec.normalization * spec.dim / (h * h)
        elif spec.kind is KernelKind.SPIKY and spec.dim == 1:
            limit = 6.0 * c * h
        else:
            limit = 0.0
        out = np.where(at_zero, limit, out)
    return _maybe_scalar(out, scalar)
