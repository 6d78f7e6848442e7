"""Command-line entry point: sph-parvi-plot.

Exit codes: 0 success, 2 bad arguments or unreadable bundle.
"""

from __future__ import annotations

import argparse
import sys

from .bundle import BundleError
from .figures import SUPPORTED_PLOTS, PlotRequest, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sph-parvi-plot", description="Render figures from an sph-parvi output bundle"
    )
    parser.add_argument("--run", required=True, help="run directory containing the output bundle")
    parser.add_argument(
        "--plots",
        default=",".join(SUPPORTED_PLOTS),
        help=f"comma-separated subset of {{{','.join(SUPPORTED_PLOTS)}}}",
    )
    parser.add_argument("--fmt", default="png", choices=("png", "svg"), help="figure file format")
    parser.add_argument("--grid", type=int, default=200, help="contour grid resolution per axis")
    parser.add_argument("--out", default=None, help="output directory (default: <run>/plots)")
    args = parser.parse_args(argv)

    plots = tuple(p.strip() for p in args.plots.split(",") if p.strip())
    try:
        request = PlotRequest(run_dir=args.run, plots=plots, fmt=args.fmt, grid=args.grid, out_dir=args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        written = render(request)
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
