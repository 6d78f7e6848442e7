"""Target models: log-density, scores, marginals, and config construction."""

import math

import numpy as np
import pytest

from sph_parvi.errors import ConfigurationError
from sph_parvi.targets import (
    check_score,
    gaussian_target,
    marginal_cdf,
    marginal_cdf_antiderivative,
    marginal_mean,
    marginal_pdf,
    mixture_target,
    query_density,
    query_score,
    target_from_config,
)


def test_standard_gaussian_score_at_mode_is_zero():
    target = gaussian_target([0.0], [1.0])
    assert np.all(query_score(target, np.array([[0.0]])) == 0.0)


def test_standard_2d_gaussian_score():
    target = gaussian_target([0.0, 0.0], [1.0, 1.0])
    score = query_score(target, np.array([[1.0, 0.0]]))
    assert np.allclose(score, [[-1.0, 0.0]], rtol=0.0, atol=1e-15)


def test_shifted_scaled_gaussian_score():
    # score = (mean - x) / var
    target = gaussian_target([2.0], [4.0])
    score = query_score(target, np.array([[4.0]]))
    assert np.allclose(score, [[-0.5]], rtol=0.0, atol=1e-15)


def test_density_matches_direct_formula():
    target = gaussian_target([1.0, -2.0], [0.5, 3.0])
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(64, 2))
    dens = query_density(target, pts)
    direct = (
        np.exp(-0.5 * (pts[:, 0] - 1.0) ** 2 / 0.5) / math.sqrt(2 * math.pi * 0.5)
        * np.exp(-0.5 * (pts[:, 1] + 2.0) ** 2 / 3.0) / math.sqrt(2 * math.pi * 3.0)
    )
    assert np.allclose(dens, direct, rtol=1e-12, atol=0.0)


def test_single_component_mixture_equals_gaussian():
    gauss = gaussian_target([0.7, -0.1], [1.4, 0.9])
    mix = mixture_target([(1.0, [0.7, -0.1], [1.4, 0.9])])
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(100, 2)) * 2.0
    d1 = query_density(gauss, pts)
    d2 = query_density(mix, pts)
    s1 = query_score(gauss, pts)
    s2 = query_score(mix, pts)
    assert np.allclose(d1, d2, rtol=1e-12, atol=0.0)
    assert np.allclose(s1, s2, rtol=1e-12, atol=1e-300)


def test_symmetric_mixture_score_vanishes_at_midpoint():
    mix = mixture_target([(0.5, [-2.0], [1.0]), (0.5, [2.0], [1.0])])
    score = query_score(mix, np.array([[0.0]]))
    assert np.allclose(score, 0.0, atol=1e-14)


def test_mixture_score_matches_log_density_finite_difference():
    mix = mixture_target([(0.3, [-1.0], [0.7]), (0.7, [1.5], [2.0])])
    x = 0.3
    step = 1e-6
    lo = mix.log_density(np.array([[x - step]]))[0]
    hi = mix.log_density(np.array([[x + step]]))[0]
    fd = (hi - lo) / (2 * step)
    score = query_score(mix, np.array([[x]]))[0, 0]
    assert math.isclose(score, fd, rel_tol=1e-5)


def test_check_score_reports_small_residual():
    mix = mixture_target([(0.4, [0.0, 1.0], [1.0, 2.0]), (0.6, [3.0, -1.0], [0.5, 1.5])])
    assert check_score(mix, n_probes=64, seed=2) < 1e-4


def test_marginal_pdf_integrates_to_cdf():
    mix = mixture_target([(0.5, [-1.0], [0.6]), (0.5, [2.0], [1.8])])
    xs = np.linspace(-6.0, 8.0, 4001)
    pdf = marginal_pdf(mix, 0, xs)
    cdf = marginal_cdf(mix, 0, xs)
    riemann = np.cumsum(pdf) * (xs[1] - xs[0])
    # trapezoid drift stays tiny over the whole window
    assert np.max(np.abs((riemann - riemann[-1] + cdf[-1]) - cdf)) < 1e-3


def test_marginal_cdf_antiderivative_differentiates_back():
    mix = mixture_target([(0.25, [0.0], [1.0]), (0.75, [1.0], [4.0])])
    for x in (-2.0, -0.3, 0.8, 2.7):
        step = 1e-6
        lo = marginal_cdf_antiderivative(mix, 0, np.array([x - step]))[0]
        hi = marginal_cdf_antiderivative(mix, 0, np.array([x + step]))[0]
        fd = (hi - lo) / (2 * step)
        assert math.isclose(fd, float(marginal_cdf(mix, 0, np.array([x]))[0]), rel_tol=1e-6)


def test_marginal_mean_is_weighted_component_mean():
    mix = mixture_target([(0.3, [-2.0, 5.0], [1.0, 1.0]), (0.7, [4.0, -1.0], [2.0, 2.0])])
    assert math.isclose(marginal_mean(mix, 0), 0.3 * -2.0 + 0.7 * 4.0, rel_tol=1e-14)
    assert math.isclose(marginal_mean(mix, 1), 0.3 * 5.0 + 0.7 * -1.0, rel_tol=1e-14)


def test_target_from_config_gaussian_and_mixture():
    g = target_from_config({"type": "gaussian", "mean": [0.0, 1.0], "var": [1.0, 2.0]})
    assert g.dim == 2
    m = target_from_config(
        {
            "type": "mixture",
            "components": [
                {"weight": 0.5, "mean": [-2.0, 0.0], "var": [1.0, 1.0]},
                {"weight": 0.5, "mean": [2.0, 0.0], "var": [1.0, 1.0]},
            ],
        }
    )
    assert m.dim == 2
    assert np.allclose(np.asarray(m.weights), [0.5, 0.5])


def test_target_from_config_rejects_unknown_keys():
    with pytest.raises(ConfigurationError):
        target_from_config({"type": "gaussian", "mean": [0.0], "var": [1.0], "cov": [1.0]})
    with pytest.raises(ConfigurationError):
        target_from_config({"type": "banana"})


def test_mixture_rejects_bad_weights():
    with pytest.raises(ConfigurationError):
        mixture_target([(0.4, [0.0], [1.0]), (0.4, [1.0], [1.0])])  # weights must sum to 1
    with pytest.raises(ConfigurationError):
        mixture_target([(1.0, [0.0], [0.0])])  # variances must be positive
