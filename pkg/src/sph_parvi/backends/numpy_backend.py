"""Vectorized numpy implementation of the pairwise operations.

Every function mirrors a routine in the compiled core (_pairwise_cy) with
identical signatures so the two are interchangeable. Kernel math is
delegated to sph_parvi.kernels, which these arguments parameterize through
a reconstructed KernelSpec.
"""

from __future__ import annotations

import numpy as np

from ..kernels import KernelKind, KernelSpec, kernel_laplacian, kernel_radial_derivative, kernel_value

_CODE_TO_KIND = {0: KernelKind.POLY6, 1: KernelKind.SPIKY, 2: KernelKind.VISCOSITY, 3: KernelKind.CUBIC_SPLINE}


def _spec(kind_code: int, dim: int, h: float, norm: float) -> KernelSpec:
    return KernelSpec(kind=_CODE_TO_KIND[kind_code], dim=dim, h=h, normalization=norm)


def build_cache(positions: np.ndarray, kind_code: int, h: float, norm: float):
    """All-pairs distances, kernel values, and kernel gradients.

    Returns (distances (M,M), kernel_values (M,M), kernel_grads (M,M,d)).
    The gradient rows use grad_ij = dK/dr(r_ij)/r_ij * (r_i - r_j) with the
    coincident-pair convention grad = 0.
    """
    m, d = positions.shape
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    spec = _spec(kind_code, d, h, norm)
    kvals = kernel_value(spec, dist)
    dkdr = kernel_radial_derivative(spec, dist)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(dist > 0.0, dkdr / np.where(dist > 0.0, dist, 1.0), 0.0)
    kgrads = scale[:, :, None] * diff
    return dist, kvals, np.ascontiguousarray(kgrads)


def laplacian_matrix(dist: np.ndarray, kind_code: int, dim: int, h: float, norm: float) -> np.ndarray:
    """Radial kernel Laplacian evaluated at every pair distance."""
    return np.asarray(kernel_laplacian(_spec(kind_code, dim, h, norm), dist))


def summation_density(kernel_values: np.ndarray, masses: np.ndarray) -> np.ndarray:
    """rho_i = sum_j m_j K_ij, including the self term on the diagonal."""
    return kernel_values @ masses


def continuity_rate(
    positions: np.ndarray,
    velocities: np.ndarray,
    masses: np.ndarray,
    densities: np.ndarray,
    dist: np.ndarray,
    kgrads: np.ndarray,
    delta_coeff: float,
    h: float,
) -> np.ndarray:
    """drho_i/dt = sum_j m_j (v_i - v_j) . grad_ij + delta_i.

    delta_i is the density-diffusion term
    delta_coeff * sum_j (m_j/rho_j) * 2 (rho_j/rho_i - 1) (r_i - r_j).grad_ij
                   / (|r_ij|^2 + 0.1 h^2)
    with delta_coeff = a_d * h * c0; pass 0 to disable it.
    """
    dv = velocities[:, None, :] - velocities[None, :, :]
    rate = np.einsum("ijk,ijk->ij", dv, kgrads) @ masses
    if delta_coeff != 0.0:
        dr = positions[:, None, :] - positions[None, :, :]
        rdotg = np.einsum("ijk,ijk->ij", dr, kgrads)
        ratio = densities[None, :] / densities[:, None]
        psi_dot = 2.0 * (ratio - 1.0) * rdotg / (dist * dist + 0.1 * h * h)
        rate = rate + delta_coeff * (psi_dot @ (masses / densities))
    return rate


def pressure_accel(masses: np.ndarray, densities: np.ndarray, pressures: np.ndarray, kgrads: np.ndarray) -> np.ndarray:
    """a_i = -sum_j m_j (P_i/rho_i^2 + P_j/rho_j^2) grad_ij."""
    s = pressures / (densities * densities)
    g1 = np.einsum("j,ijd->id", masses, kgrads)
    g2 = np.einsum("j,ijd->id", masses * s, kgrads)
    return -(s[:, None] * g1 + g2)


def viscous_laplacian_accel(
    velocities: np.ndarray,
    masses: np.ndarray,
    densities: np.ndarray,
    lap: np.ndarray,
    mu: float,
    symmetric: int,
) -> np.ndarray:
    """nu_i sum_j (m_j/rho_j) v_j lap_ij, with v_j -> (v_j - v_i) if symmetric.

    nu_i = mu / rho_i.
    """
    w = lap * (masses / densities)[None, :]
    out = w @ velocities
    if symmetric:
        out = out - w.sum(axis=1)[:, None] * velocities
    return (mu / densities)[:, None] * out


def viscous_linear_accel(
    positions: np.ndarray,
    velocities: np.ndarray,
    masses: np.ndarray,
    densities: np.ndarray,
    dist: np.ndarray,
    kgrads: np.ndarray,
    visc_alpha: float,
    h: float,
    c0: float,
    eps_sing: float,
) -> np.ndarray:
    """Pairwise linear artificial viscosity, active only for approaching pairs.

    f_i = sum_j m_j eta_ij [(v_i - v_j).(r_i - r_j) / (|r_ij|^2 + eps_sing h^2)] grad_ij
    restricted to (v_i - v_j).(r_i - r_j) < 0, with
    eta_ij = 2 visc_alpha h c0 / (rho_i + rho_j).
    """
    dv = velocities[:, None, :] - velocities[None, :, :]
    dr = positions[:, None, :] - positions[None, :, :]
    vdotr = np.einsum("ijk,ijk->ij", dv, dr)
    eta = (2.0 * visc_alpha * h * c0) / (densities[:, None] + densities[None, :])
    coef = np.where(vdotr < 0.0, masses[None, :] * eta * vdotr / (dist * dist + eps_sing * h * h), 0.0)
    return np.einsum("ij,ijd->id", coef, kgrads)


def regularization_accel(masses: np.ndarray, densities: np.ndarray, kgrads: np.ndarray, eps_p: float) -> np.ndarray:
    """f_i = sum_j m_j grad_ij / (rho_i + eps_p)."""
    g1 = np.einsum("j,ijd->id", masses, kgrads)
    return g1 / (densities + eps_p)[:, None]
