"""Figure generation from sph-parvi output bundles.

Reads only the documented bundle files (summary.json, particle CSVs,
trace.csv); targets are reconstructed analytically from the config echo.
No physics is ever recomputed.
"""

from .bundle import Bundle, BundleError, load_bundle
from .figures import PlotRequest, marginals_data, render, scatter_data, traces_data

__all__ = [
    "Bundle",
    "BundleError",
    "load_bundle",
    "PlotRequest",
    "render",
    "scatter_data",
    "marginals_data",
    "traces_data",
]

__version__ = "0.1.0"
