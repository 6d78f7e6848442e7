# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled core for the O(M^2) pairwise operations.

Mirrors sph_parvi.backends.numpy_backend function-for-function; the kernel
formulas are inlined here (codes: 0 poly6, 1 spiky, 2 viscosity, 3 cubic
spline) and the two implementations are held together by the backend
equivalence tests.
"""

import numpy as np

from libc.math cimport sqrt

cdef double VISC_CLAMP = 1e-12


cdef inline double kval(int kind, double r, double h, double c) noexcept nogil:
    cdef double t, q
    if kind == 0:
        if r < h:
            t = h * h - r * r
            return c * t * t * t
        return 0.0
    if kind == 1:
        if r < h:
            t = h - r
            return c * t * t * t
        return 0.0
    if kind == 2:
        if r > VISC_CLAMP * h and r < h:
            return c * (-(r * r * r) / (2.0 * h * h * h) + (r * r) / (h * h) + h / (2.0 * r) - 1.0)
        return 0.0
    q = r / h
    if q <= 1.0:
        return c * (1.0 - 1.5 * q * q + 0.75 * q * q * q)
    if q < 2.0:
        t = 2.0 - q
        return c * 0.25 * t * t * t
    return 0.0


cdef inline double kdr(int kind, double r, double h, double c) noexcept nogil:
    cdef double t, q
    if kind == 0:
        if r < h:
            t = h * h - r * r
            return -6.0 * c * r * t * t
        return 0.0
    if kind == 1:
        if r < h:
            t = h - r
            return -3.0 * c * t * t
        return 0.0
    if kind == 2:
        if r > VISC_CLAMP * h and r < h:
            return c * (-3.0 * r * r / (2.0 * h * h * h) + 2.0 * r / (h * h) - h / (2.0 * r * r))
        return 0.0
    q = r / h
    if q <= 1.0:
        return (c / h) * (-3.0 * q + 2.25 * q * q)
    if q < 2.0:
        t = 2.0 - q
        return (c / h) * (-0.75 * t * t)
    return 0.0


cdef inline double klap(int kind, int dim, double r, double h, double c) noexcept nogil:
    cdef double d2, q
    if r == 0.0:
        if kind == 0:
            return -6.0 * c * h * h * h * h * dim
        if kind == 3:
            return -3.0 * c * dim / (h * h)
        if kind == 1 and dim == 1:
            return 6.0 * c * h
        return 0.0
    if kind == 0:
        if r < h:
            d2 = -6.0 * c * (h * h - r * r) * (h * h - 5.0 * r * r)
        else:
            return 0.0
    elif kind == 1:
        if r < h:
            d2 = 6.0 * c * (h - r)
        else:
            return 0.0
    elif kind == 2:
        if r > VISC_CLAMP * h and r < h:
            d2 = c * (-3.0 * r / (h * h * h) + 2.0 / (h * h) + h / (r * r * r))
        else:
            return 0.0
    else:
        q = r / h
        if q <= 1.0:
            d2 = (c / (h * h)) * (-3.0 + 4.5 * q)
        elif q < 2.0:
            d2 = (c / (h * h)) * 1.5 * (2.0 - q)
        else:
            return 0.0
    return d2 + (dim - 1) * kdr(kind, r, h, c) / r


def build_cache(double[:, ::1] positions, int kind_code, double h, double norm):
    """All-pairs distances, kernel values, and kernel gradients."""
    cdef Py_ssize_t m = positions.shape[0]
    cdef Py_ssize_t d = positions.shape[1]
    dist_arr = np.zeros((m, m), dtype=np.float64)
    kval_arr = np.zeros((m, m), dtype=np.float64)
    grad_arr = np.zeros((m, m, d), dtype=np.float64)
    cdef double[:, ::1] dist = dist_arr
    cdef double[:, ::1] kv = kval_arr
    cdef double[:, :, ::1] gr = grad_arr
    cdef Py_ssize_t i, j, k
    cdef double s, diffk, r, scale, k0

    k0 = kval(kind_code, 0.0, h, norm)
    with nogil:
        for i in range(m):
            kv[i, i] = k0
            for j in range(i + 1, m):
                s = 0.0
                for k in range(d):
                    diffk = positions[i, k] - positions[j, k]
                    s += diffk * diffk
                r = sqrt(s)
                dist[i, j] = r
                dist[j, i] = r
                kv[i, j] = kval(kind_code, r, h, norm)
                kv[j, i] = kv[i, j]
                if r > 0.0:
                    scale = kdr(kind_code, r, h, norm) / r
                    for k in range(d):
                        diffk = positions[i, k] - positions[j, k]
                        gr[i, j, k] = scale * diffk
                        gr[j, i, k] = -gr[i, j, k]
    return dist_arr, kval_arr, grad_arr


def laplacian_matrix(double[:, ::1] dist, int kind_code, int dim, double h, double norm):
    cdef Py_ssize_t m = dist.shape[0]
    out_arr = np.zeros((m, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(m):
            for j in range(m):
                out[i, j] = klap(kind_code, dim, dist[i, j], h, norm)
    return out_arr


def summation_density(double[:, ::1] kernel_values, double[::1] masses):
    cdef Py_ssize_t m = kernel_values.shape[0]
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += kernel_values[i, j] * masses[j]
            out[i] = acc
    return out_arr


def continuity_rate(
    double[:, ::1] positions,
    double[:, ::1] velocities,
    double[::1] masses,
    double[::1] densities,
    double[:, ::1] dist,
    double[:, :, ::1] kgrads,
    double delta_coeff,
    double h,
):
    cdef Py_ssize_t m = positions.shape[0]
    cdef Py_ssize_t d = positions.shape[1]
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff_acc, dvg, drg, r
    with nogil:
        for i in range(m):
            acc = 0.0
            diff_acc = 0.0
            for j in range(m):
                dvg = 0.0
                for k in range(d):
                    dvg += (velocities[i, k] - velocities[j, k]) * kgrads[i, j, k]
                acc += masses[j] * dvg
                if delta_coeff != 0.0:
                    drg = 0.0
                    for k in range(d):
                        drg += (positions[i, k] - positions[j, k]) * kgrads[i, j, k]
                    r = dist[i, j]
                    diff_acc += (masses[j] / densities[j]) * 2.0 * (densities[j] / densities[i] - 1.0) * drg / (r * r + 0.1 * h * h)
            out[i] = acc + delta_coeff * diff_acc
    return out_arr


def pressure_accel(double[::1] masses, double[::1] densities, double[::1] pressures, double[:, :, ::1] kgrads):
    cdef Py_ssize_t m = masses.shape[0]
    cdef Py_ssize_t d = kgrads.shape[2]
    out_arr = np.zeros((m, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double si, coef
    with nogil:
        for i in range(m):
            si = pressures[i] / (densities[i] * densities[i])
            for j in range(m):
                coef = masses[j] * (si + pressures[j] / (densities[j] * densities[j]))
                for k in range(d):
                    out[i, k] -= coef * kgrads[i, j, k]
    return out_arr


def viscous_laplacian_accel(
    double[:, ::1] velocities,
    double[::1] masses,
    double[::1] densities,
    double[:, ::1] lap,
    double mu,
    int symmetric,
):
    cdef Py_ssize_t m = velocities.shape[0]
    cdef Py_ssize_t d = velocities.shape[1]
    out_arr = np.zeros((m, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double w, wsum, nu
    with nogil:
        for i in range(m):
            wsum = 0.0
            for j in range(m):
                w = lap[i, j] * masses[j] / densities[j]
                wsum += w
                for k in range(d):
                    out[i, k] += w * velocities[j, k]
            nu = mu / densities[i]
            for k in range(d):
                if symmetric:
                    out[i, k] -= wsum * velocities[i, k]
                out[i, k] *= nu
    return out_arr


def viscous_linear_accel(
    double[:, ::1] positions,
    double[:, ::1] velocities,
    double[::1] masses,
    double[::1] densities,
    double[:, ::1] dist,
    double[:, :, ::1] kgrads,
    double visc_alpha,
    double h,
    double c0,
    double eps_sing,
):
    cdef Py_ssize_t m = positions.shape[0]
    cdef Py_ssize_t d = positions.shape[1]
    out_arr = np.zeros((m, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double vdotr, eta, coef, r
    with nogil:
        for i in range(m):
            for j in range(m):
                vdotr = 0.0
                for k in range(d):
                    vdotr += (velocities[i, k] - velocities[j, k]) * (positions[i, k] - positions[j, k])
                if vdotr < 0.0:
                    r = dist[i, j]
                    eta = 2.0 * visc_alpha * h * c0 / (densities[i] + densities[j])
                    coef = masses[j] * eta * vdotr / (r * r + eps_sing * h * h)
                    for k in range(d):
                        out[i, k] += coef * kgrads[i, j, k]
    return out_arr


def regularization_accel(double[::1] masses, double[::1] densities, double[:, :, ::1] kgrads, double eps_p):
    cdef Py_ssize_t m = masses.shape[0]
    cdef Py_ssize_t d = kgrads.shape[2]
    out_arr = np.zeros((m, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double inv
    with nogil:
        for i in range(m):
            for j in range(m):
                for k in range(d):
                    out[i, k] += masses[j] * kgrads[i, j, k]
            inv = 1.0 / (densities[i] + eps_p)
            for k in range(d):
                out[i, k] *= inv
    return out_arr
