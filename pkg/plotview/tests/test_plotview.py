"""Plot data assembly and rendering, on synthetic and real bundles.

Assertions target the arrays handed to the drawing layer, never pixels.
The end-to-end cases generate bundles by invoking the sph-parvi CLI as a
subprocess; this package itself never imports the sampler.
"""

import json
import math
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from plotview import BundleError, PlotRequest, load_bundle, marginals_data, render, scatter_data, traces_data
from plotview.analytic import joint_density_2d, marginal_pdf, target_components
from plotview.cli import main as plot_main

REPO_CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def _fmt(x):
    return format(float(x), ".17g")


def _write_bundle(run_dir: Path, *, d=2, m=20, t=5, target=None, seed=0) -> Path:
    """Fabricate a minimal, self-consistent bundle directory."""
    rng = np.random.default_rng(seed)
    run_dir.mkdir(parents=True, exist_ok=True)
    final = rng.normal(size=(m, d))
    best = rng.normal(size=(m, d))
    for name, pos in (("particles_final.csv", final), ("particles_best.csv", best)):
        lines = [",".join(f"dim{k}" for k in range(d))]
        lines += [",".join(_fmt(v) for v in row) for row in pos]
        (run_dir / name).write_text("\n".join(lines) + "\n")
    rows = ["iter,avg_density,kinetic_energy"]
    rows += [f"{i},{_fmt(1.0 + 0.1 * i)},{_fmt(0.01 * i)}" for i in range(t)]
    (run_dir / "trace.csv").write_text("\n".join(rows) + "\n")
    if target is None:
        target = {"type": "gaussian", "mean": [0.0] * d, "var": [1.0] * d}
    kde_blocks = []
    for k in range(d):
        grid = np.linspace(-3.0, 3.0, 64)
        dens = np.exp(-0.5 * grid**2) / math.sqrt(2 * math.pi)
        kde_blocks.append({"grid": grid.tolist(), "density": dens.tolist()})
    summary = {
        "status": "ok",
        "config": {"M": m, "d": d, "T": t, "target": target},
        "diagnostics": {"final": {"kde": kde_blocks}, "best": {"kde": kde_blocks}},
        "traces_meta": {"iterations_completed": t},
        "timing": {"total": 0.1},
    }
    (run_dir / "summary.json").write_text(json.dumps(summary))
    return run_dir


# ----------------------------------------------------------------- loading

def test_missing_files_are_hard_errors(tmp_path):
    with pytest.raises(BundleError, match="missing"):
        load_bundle(tmp_path)
    run = _write_bundle(tmp_path / "run")
    (run / "trace.csv").unlink()
    with pytest.raises(BundleError, match="trace.csv"):
        load_bundle(run)


def test_malformed_summary_is_a_hard_error(tmp_path):
    run = _write_bundle(tmp_path / "run")
    (run / "summary.json").write_text("{broken")
    with pytest.raises(BundleError, match="parse"):
        load_bundle(run)


def test_bundle_shapes(tmp_path):
    b = load_bundle(_write_bundle(tmp_path / "run", d=2, m=12, t=7))
    assert b.final.shape == (12, 2) and b.best.shape == (12, 2)
    assert b.dim == 2
    assert list(b.iterations) == list(range(7))


# ------------------------------------------------------------------ traces

def test_traces_data_has_one_point_per_iteration(tmp_path):
    """A 5-iteration run yields exactly 5 points per plotted series."""
    b = load_bundle(_write_bundle(tmp_path / "run", t=5))
    data = traces_data(b)
    assert data["iterations"].shape == (5,)
    assert data["avg_density"].shape == (5,)
    assert data["kinetic_energy"].shape == (5,)
    assert np.allclose(data["avg_density"], 1.0 + 0.1 * np.arange(5))


# ----------------------------------------------------------------- scatter

def test_scatter_grid_matches_requested_resolution(tmp_path):
    b = load_bundle(_write_bundle(tmp_path / "run", d=2))
    data = scatter_data(b, resolution=73)
    assert data["grid_x"].shape == (73, 73)
    assert data["grid_y"].shape == (73, 73)
    assert data["density"].shape == (73, 73)
    assert np.array_equal(data["final"], b.final)
    assert np.array_equal(data["best"], b.best)


def test_scatter_density_matches_target_formula(tmp_path):
    target = {"type": "gaussian", "mean": [1.0, -0.5], "var": [2.0, 0.5]}
    b = load_bundle(_write_bundle(tmp_path / "run", d=2, target=target))
    data = scatter_data(b, resolution=41)
    gx, gy, z = data["grid_x"], data["grid_y"], data["density"]
    ij = (20, 7)
    x, y = gx[ij], gy[ij]
    expected = math.exp(-0.5 * ((x - 1.0) ** 2 / 2.0 + (y + 0.5) ** 2 / 0.5)) / (2 * math.pi * math.sqrt(1.0))
    assert math.isclose(z[ij], expected, rel_tol=1e-12)
    # grid spans the 3-sigma box of the target
    assert gx.min() <= 1.0 - 3.0 * math.sqrt(2.0) and gx.max() >= 1.0 + 3.0 * math.sqrt(2.0)


def test_scatter_is_none_for_non_2d(tmp_path):
    b = load_bundle(_write_bundle(tmp_path / "run", d=1))
    assert scatter_data(b, resolution=50) is None


# --------------------------------------------------------------- marginals

def test_marginals_pass_kde_arrays_through_verbatim(tmp_path):
    b = load_bundle(_write_bundle(tmp_path / "run", d=2))
    data = marginals_data(b)
    assert len(data) == 2
    stored = b.summary["diagnostics"]["final"]["kde"][1]
    assert np.array_equal(data[1]["clouds"]["final"]["grid"], stored["grid"])
    assert np.array_equal(data[1]["clouds"]["final"]["density"], stored["density"])


def test_marginals_analytic_curve_is_normalized(tmp_path):
    target = {
        "type": "mixture",
        "components": [
            {"weight": 0.4, "mean": [-1.0], "var": [0.5]},
            {"weight": 0.6, "mean": [2.0], "var": [1.0]},
        ],
    }
    comps = target_components(target)
    grid = np.linspace(-10.0, 12.0, 20001)
    mass = np.trapezoid(marginal_pdf(comps, 0, grid), grid)
    assert math.isclose(mass, 1.0, rel_tol=1e-6)
    # hand value at one point
    x = 0.3
    expected = 0.4 * math.exp(-0.5 * (x + 1.0) ** 2 / 0.5) / math.sqrt(2 * math.pi * 0.5)
    expected += 0.6 * math.exp(-0.5 * (x - 2.0) ** 2 / 1.0) / math.sqrt(2 * math.pi * 1.0)
    assert math.isclose(marginal_pdf(comps, 0, np.array([x]))[0], expected, rel_tol=1e-12)


def test_joint_density_2d_matches_product_form():
    comps = target_components({"type": "gaussian", "mean": [0.0, 1.0], "var": [1.0, 4.0]})
    gx, gy = np.meshgrid(np.linspace(-2, 2, 5), np.linspace(-2, 4, 5))
    z = joint_density_2d(comps, gx, gy)
    expected = (
        np.exp(-0.5 * gx**2) / math.sqrt(2 * math.pi) * np.exp(-0.5 * (gy - 1.0) ** 2 / 4.0) / math.sqrt(8 * math.pi)
    )
    assert np.allclose(z, expected, rtol=1e-12)


# ---------------------------------------------------------------- requests

def test_plot_request_validation(tmp_path):
    with pytest.raises(ValueError):
        PlotRequest(run_dir=tmp_path, plots=("sparklines",))
    with pytest.raises(ValueError):
        PlotRequest(run_dir=tmp_path, plots=())
    with pytest.raises(ValueError):
        PlotRequest(run_dir=tmp_path, fmt="pdf")
    with pytest.raises(ValueError):
        PlotRequest(run_dir=tmp_path, grid=1)
    req = PlotRequest(run_dir=tmp_path)
    assert req.out_dir == tmp_path / "plots"


# --------------------------------------------------------------- rendering

def test_render_writes_all_figures_for_2d(tmp_path):
    run = _write_bundle(tmp_path / "run", d=2)
    written = render(PlotRequest(run_dir=run, grid=50))
    names = sorted(p.name for p in written)
    assert names == ["marginals.png", "scatter.png", "traces.png"]
    for p in written:
        assert p.stat().st_size > 0


def test_render_skips_scatter_for_1d_with_warning(tmp_path):
    run = _write_bundle(tmp_path / "run", d=1)
    with pytest.warns(UserWarning, match="scatter skipped"):
        written = render(PlotRequest(run_dir=run))
    assert sorted(p.name for p in written) == ["marginals.png", "traces.png"]


def test_render_is_idempotent_on_data(tmp_path):
    run = _write_bundle(tmp_path / "run", d=2)
    req = PlotRequest(run_dir=run, grid=40)
    first = render(req)
    second = render(req)
    assert first == second
    b = load_bundle(run)
    d1, d2 = scatter_data(b, 40), scatter_data(b, 40)
    assert np.array_equal(d1["density"], d2["density"])


def test_cli_renders_and_reports_paths(tmp_path, capsys):
    run = _write_bundle(tmp_path / "run", d=2)
    assert plot_main(["--run", str(run), "--plots", "traces,scatter", "--grid", "60", "--fmt", "svg"]) == 0
    out_lines = capsys.readouterr().out.strip().splitlines()
    assert len(out_lines) == 2
    assert (run / "plots" / "traces.svg").exists()
    assert (run / "plots" / "scatter.svg").exists()


def test_cli_error_codes(tmp_path, capsys):
    assert plot_main(["--run", str(tmp_path / "absent")]) == 2
    run = _write_bundle(tmp_path / "run")
    assert plot_main(["--run", str(run), "--plots", "pixels"]) == 2


# ----------------------------------------------- end-to-end (real bundles)

def _local_maxima_above(y, frac):
    y = np.asarray(y, dtype=float)
    thr = frac * float(y.max())
    interior = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] > thr)
    return int(np.count_nonzero(interior))


def _run_sampler(config: Path, out: Path):
    exe = shutil.which("sph-parvi")
    if exe is None:
        pytest.skip("sph-parvi CLI not installed")
    proc = subprocess.run([exe, "run", "--config", str(config), "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="module")
def gaussian_run(tmp_path_factory):
    return _run_sampler(REPO_CONFIGS / "gaussian_1d_force.json", tmp_path_factory.mktemp("g1d"))


@pytest.fixture(scope="module")
def mixture_run(tmp_path_factory):
    return _run_sampler(REPO_CONFIGS / "mixture_2d_force.json", tmp_path_factory.mktemp("m2d"))


def test_end_to_end_gaussian_run_renders(gaussian_run):
    """1D run: marginals and traces render; scatter is skipped cleanly."""
    with pytest.warns(UserWarning, match="scatter skipped"):
        written = render(PlotRequest(run_dir=gaussian_run))
    assert sorted(p.name for p in written) == ["marginals.png", "traces.png"]
    b = load_bundle(gaussian_run)
    data = marginals_data(b)[0]
    # the sampled cloud's KDE concentrates around the single target mode
    best = data["clouds"]["best"]
    assert _local_maxima_above(best["density"], 0.1) == 1
    peak_at = best["grid"][int(np.argmax(best["density"]))]
    assert abs(peak_at) < 0.5


def test_end_to_end_mixture_run_renders_all_three(mixture_run):
    written = render(PlotRequest(run_dir=mixture_run, grid=120))
    assert sorted(p.name for p in written) == ["marginals.png", "scatter.png", "traces.png"]
    b = load_bundle(mixture_run)
    assert scatter_data(b, 120)["grid_x"].shape == (120, 120)


def test_mixture_kde_shows_exactly_two_modes(mixture_run):
    """Mixture-run KDE along the separated axis: exactly 2 local maxima
    above 10% of the global maximum."""
    b = load_bundle(mixture_run)
    data = marginals_data(b)[0]
    for cloud in ("final", "best"):
        assert _local_maxima_above(data["clouds"][cloud]["density"], 0.1) == 2, cloud


def test_trace_figure_covers_full_run(mixture_run):
    b = load_bundle(mixture_run)
    data = traces_data(b)
    expected = b.summary["traces_meta"]["iterations_completed"]
    assert data["iterations"].size == expected
    assert data["avg_density"].size == expected
