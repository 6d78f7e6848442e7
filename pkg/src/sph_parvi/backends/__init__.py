"""Backend selection for the O(M^2) pairwise operations.

Two interchangeable implementations exist: a compiled Cython core and a
vectorized numpy fallback. The active one is chosen at import time; set
SPH_PARVI_BACKEND to "cython" or "python" to force a choice ("auto" or
unset tries the compiled core first).
"""

from __future__ import annotations

import os

from ..errors import ConfigurationError
from ..kernels import KernelKind

__all__ = ["ACTIVE", "ACTIVE_NAME", "KIND_CODES", "get_backend", "available_backends"]

# Integer codes shared with the compiled core.
KIND_CODES = {
    KernelKind.POLY6: 0,
    KernelKind.SPIKY: 1,
    KernelKind.VISCOSITY: 2,
    KernelKind.CUBIC_SPLINE: 3,
}


def _load_cython():
    from sph_parvi import _pairwise_cy

    return _pairwise_cy


def _load_python():
    from . import numpy_backend

    return numpy_backend


def get_backend(name: str):
    if name == "cython":
        return _load_cython()
    if name == "python":
        return _load_python()
    raise ConfigurationError(f"unknown backend {name!r} (expected 'cython' or 'python')")


def available_backends() -> list[str]:
    names = []
    try:
        _load_cython()
        names.append("cython")
    except ImportError:
        pass
    names.append("python")
    return names


def _select():
    requested = os.environ.get("SPH_PARVI_BACKEND", "auto").strip().lower() or "auto"
    if requested == "auto":
        try:
            return _load_cython(), "cython"
        except ImportError:
            return _load_python(), "python"
    if requested in ("cython", "python"):
        try:
            return get_backend(requested), requested
        except ImportError as exc:
            raise ConfigurationError(f"SPH_PARVI_BACKEND={requested} but that backend is unavailable: {exc}")
    raise ConfigurationError(f"SPH_PARVI_BACKEND={requested!r} is not one of auto, cython, python")


ACTIVE, ACTIVE_NAME = _select()
