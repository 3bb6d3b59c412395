"""Gaussian expectations, both mean widths, Urysohn, Santalo and Shannon."""
from __future__ import annotations

from math import erf, log, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logconc import GridPotential, GridSpec, IndicatorBody, Quadratic, RadialPotential, sample_on_grid, scalar_mult, truncate
from logconc.bodies import Box, Segment
from logconc.core import gaussian_profile, norm_cone_profile
from logconc.meanwidth import (
    GaussianMeasure,
    TildeConfig,
    c_n,
    check_definition_equality,
    gaussian_expectation,
    mean_width,
    mean_width_tilde,
    santalo_check,
    shannon_check,
    urysohn_gap,
)

E_NORM_2D = sqrt(pi / 2)  # E|X| for X standard normal in the plane


# --------------------------------------------------------------------------
# Gaussian expectations
# --------------------------------------------------------------------------

@pytest.mark.parametrize("dim", [1, 2, 3])
def test_total_mass_is_one(dim):
    assert GaussianMeasure(dim).total_mass() == pytest.approx(1.0, abs=1e-13)


def test_quadrature_limited_to_three_dims():
    with pytest.raises(ValueError):
        GaussianMeasure(4).quadrature()


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_polynomial_moments_exact(dim):
    m = GaussianMeasure(dim)
    assert gaussian_expectation(lambda x: np.ones(len(x)), m).value == pytest.approx(1.0, abs=1e-13)
    assert gaussian_expectation(lambda x: x[:, 0] ** 2, m).value == pytest.approx(1.0, abs=1e-12)
    assert gaussian_expectation(lambda x: x[:, 0] ** 4, m).value == pytest.approx(3.0, abs=1e-11)


def test_norm_expectation_in_the_plane():
    g = RadialPotential(norm_cone_profile(1.0), 2)
    assert gaussian_expectation(g, GaussianMeasure(2)).value == pytest.approx(E_NORM_2D, rel=1e-10)
    quad = gaussian_expectation(lambda x: np.linalg.norm(x, axis=1), GaussianMeasure(2), method="quadrature")
    assert quad.value == pytest.approx(E_NORM_2D, rel=1e-3)
    mc = gaussian_expectation(lambda x: np.linalg.norm(x, axis=1), GaussianMeasure(2, seed=3),
                              method="monte_carlo", n_samples=100_000)
    assert abs(mc.value - E_NORM_2D) <= 4 * mc.std_error


def test_monte_carlo_is_seeded():
    g = lambda x: np.sum(x * x, axis=1)  # noqa: E731
    a = gaussian_expectation(g, GaussianMeasure(5), method="monte_carlo", n_samples=5000, seed=9)
    b = gaussian_expectation(g, GaussianMeasure(5), method="monte_carlo", n_samples=5000, seed=9)
    assert a.value == b.value and a.seed == 9


def test_method_validation():
    with pytest.raises(ValueError):
        gaussian_expectation(Quadratic(2), GaussianMeasure(2), method="simpson")
    with pytest.raises(ValueError):
        gaussian_expectation(Quadratic(2), GaussianMeasure(3))
    with pytest.raises(ValueError):
        gaussian_expectation(Quadratic(2), GaussianMeasure(2), method="radial_1d")


# --------------------------------------------------------------------------
# M*
# --------------------------------------------------------------------------

def test_gaussian_has_unit_mean_width():
    for n in (1, 2, 7, 200):
        assert mean_width(RadialPotential(gaussian_profile(), n)).value == pytest.approx(1.0, abs=1e-12)
    assert mean_width(Quadratic(3)).value == pytest.approx(1.0, abs=1e-14)


def test_e_times_gaussian():
    eG = Quadratic(2, offset=-1.0)
    assert mean_width(eG).value == pytest.approx(2.0, abs=1e-14)
    assert mean_width(eG, method="quadrature").value == pytest.approx(2.0, abs=1e-12)


def test_cone_is_infinite_with_witness():
    rep = mean_width(RadialPotential(norm_cone_profile(1.0), 2))
    assert rep.is_infinite
    w = np.asarray(rep.diagnostics["witness"])
    assert np.linalg.norm(w) > 1.0


def test_grid_box_indicator_matches_closed_form():
    spec = GridSpec.from_bounds([-1.0, -1.0], [1.0, 1.0], 5)
    grid = GridPotential(spec, np.zeros(spec.shape))
    exact = mean_width(IndicatorBody(Box([-1.0, -1.0], [1.0, 1.0]))).value
    assert exact == pytest.approx(2 * 2 / 2 * sqrt(2 / pi), rel=1e-14)
    # Gauss-Hermite on the kinked support function is only first-order accurate
    assert mean_width(grid).value == pytest.approx(exact, rel=1e-2)
    assert mean_width(grid, method="monte_carlo", n_samples=400_000).value == pytest.approx(exact, rel=5e-3)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_negative_mean_width_as_a_shrinks(n):
    vals = [mean_width(scalar_mult(a, Quadratic(n))).value for a in (1.0, 1e-2, 1e-8, 1e-100)]
    for a, v in zip((1.0, 1e-2, 1e-8, 1e-100), vals):
        assert v == pytest.approx(1 + 2 / n * log(a), abs=1e-12)
    assert vals[-1] < -90


def test_lower_bound_from_any_point():
    spec = GridSpec.from_bounds([-2.0], [3.0], 51)
    x = spec.axes()[0]
    phi = GridPotential(spec, (x - 1) ** 2 + 0.5 * np.abs(x))
    ms = mean_width(phi).value
    assert np.all(ms >= -2 * phi.values - 1e-12)


# --------------------------------------------------------------------------
# the differential mean width
# --------------------------------------------------------------------------

def test_c_n_bookkeeping():
    for n in (1, 2, 3, 10, 50):
        assert (2 * pi) ** (n / 2) * c_n(n) == pytest.approx(2 / n, rel=1e-13)


def test_tilde_config_validation():
    with pytest.raises(ValueError):
        TildeConfig(eps_schedule=(0.1, 0.2))
    with pytest.raises(ValueError):
        TildeConfig(eps_schedule=(0.1, -0.05))
    with pytest.raises(ValueError):
        TildeConfig(extrapolation="richardson")
    with pytest.raises(ValueError):
        TildeConfig(tail=1)
    with pytest.raises(ValueError):
        TildeConfig(eps_schedule=(0.1, 0.05), tail=3)


def test_tilde_of_gaussian_is_one():
    rep = mean_width_tilde(RadialPotential(gaussian_profile(), 3))
    assert rep.value == pytest.approx(1.0, abs=1e-6)
    table = rep.diagnostics["table"]
    assert len(table) == 10 and table[0]["eps"] == 0.125


@pytest.mark.parametrize("f", [
    Quadratic(2, [0.5, -0.3], 0.2),
    IndicatorBody(Box([-1.0], [2.0])),
    truncate(RadialPotential(norm_cone_profile(1.0, 0.0), 3), 2.0),
])
def test_definitions_agree(f):
    out = check_definition_equality(f)
    assert out["passed"], out["rel_gap"]


def test_tilde_cone_diverges():
    rep = mean_width_tilde(RadialPotential(norm_cone_profile(1.0), 2))
    assert rep.is_infinite
    assert rep.diagnostics["witness"]["I_over_int_G"] > 1.05
    out = check_definition_equality(RadialPotential(norm_cone_profile(1.0), 2))
    assert out["both_infinite"] and out["passed"]


# --------------------------------------------------------------------------
# Urysohn
# --------------------------------------------------------------------------

def test_urysohn_interval():
    out = urysohn_gap(IndicatorBody(Box([-1.0], [1.0])))
    assert out["m_star"] == pytest.approx(2 * sqrt(2 / pi), rel=1e-13)
    assert out["rhs"] == pytest.approx(2 * (log(2) - 0.5 * log(2 * pi)) + 1, rel=1e-13)
    assert out["m_star"] == pytest.approx(1.59577, abs=1e-5)
    assert out["rhs"] == pytest.approx(0.548417, abs=1e-6)
    assert out["gap"] == pytest.approx(1.04735, abs=1e-5)
    assert not out["equality"]


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), c=st.floats(-3, 3), seed=st.integers(0, 1000))
def test_urysohn_equality_for_shifted_gaussians(n, c, seed):
    a = np.random.default_rng(seed).normal(size=n)
    out = urysohn_gap(Quadratic(n, a, c))
    assert abs(out["gap"]) <= 1e-12 and out["equality"]


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0.3, 4.0), lo=st.floats(-2, 0), width=st.floats(0.1, 4))
def test_urysohn_gap_nonnegative(p, lo, width):
    out = urysohn_gap(Quadratic(2, precision=[[p, 0.0], [0.0, 1.0]]))
    assert out["gap"] >= -1e-12
    assert urysohn_gap(IndicatorBody(Box([lo], [lo + width])))["gap"] > 0


def test_urysohn_degenerate_support_raises():
    with pytest.raises(ValueError):
        urysohn_gap(IndicatorBody(Segment([0.0, 0.0], [1.0, 0.0])))


def test_urysohn_grid_matches_closed_form():
    f = Quadratic(1, [0.3], 0.0, 2.0)
    grid = sample_on_grid(f, GridSpec.from_bounds([-6.0], [6.0], 2401))
    assert urysohn_gap(grid)["gap"] == pytest.approx(urysohn_gap(f)["gap"], abs=1e-4)


# --------------------------------------------------------------------------
# Santalo
# --------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_santalo_box(n):
    out = santalo_check(IndicatorBody(Box(-np.ones(n), np.ones(n))))
    assert out["product"] == pytest.approx(4.0 ** n, rel=1e-12)
    assert out["bound"] == pytest.approx((2 * pi) ** n)
    assert out["passed"]


def test_santalo_recovers_translation():
    a = np.array([1.5, -0.5])
    out = santalo_check(IndicatorBody(Box(a - 1, a + 1)))
    np.testing.assert_allclose(out["x0"], a)
    assert out["product"] == pytest.approx(16.0)
    g = santalo_check(Quadratic(2, a, 0.4))
    np.testing.assert_allclose(g["x0"], a)
    assert g["ratio"] == pytest.approx(1.0, abs=1e-12)


def test_santalo_grid_gaussian():
    a = 0.4
    f = sample_on_grid(Quadratic(1, [a]), GridSpec.from_bounds([-7.0], [8.0], 301))
    out = santalo_check(f)
    assert abs(out["x0"][0] - a) <= f.spec.spacing[0]
    assert out["ratio"] == pytest.approx(1.0, abs=1e-3)
    assert out["passed"]


# --------------------------------------------------------------------------
# Shannon
# --------------------------------------------------------------------------

def _normal(x, s=1.0):
    return np.exp(-x[:, 0] ** 2 / (2 * s * s)) / (s * sqrt(2 * pi))


def test_shannon_equality_when_q_is_a_multiple_of_p():
    out = shannon_check(_normal, lambda x: 3.0 * _normal(x), [-12.0], [12.0])
    assert out["equality"] and out["passed"]


@pytest.mark.parametrize("s", [0.5, 2.0, 3.0])
def test_shannon_gap_is_kl_divergence(s):
    out = shannon_check(_normal, lambda x: np.exp(-x[:, 0] ** 2 / (2 * s * s)), [-12.0], [12.0])
    # q is integrated over the box only
    kl = log(s) + 1 / (2 * s * s) - 0.5 + log(erf(12 / (s * sqrt(2))))
    assert out["gap"] == pytest.approx(kl, abs=1e-7)
    assert out["passed"] and not out["equality"]


def test_shannon_q_vanishing_on_support_of_p():
    out = shannon_check(_normal, lambda x: (x[:, 0] > 0).astype(float), [-12.0], [12.0])
    assert out["rhs"] == float("inf") and out["passed"]


def test_shannon_two_dims_chain():
    p = lambda x: np.where(np.all(np.abs(x) <= 0.5, axis=1), 1.0, 0.0)  # noqa: E731
    q = lambda x: np.exp(-np.sum(x * x, axis=1))  # noqa: E731
    out = shannon_check(p, q, [-0.5, -0.5], [0.5, 0.5], cells=40)
    assert out["lhs"] == pytest.approx(0.0, abs=1e-12)
    assert out["gap"] >= 0


def test_shannon_input_errors():
    with pytest.raises(ValueError):
        shannon_check(lambda x: 2 * _normal(x), _normal, [-12.0], [12.0])
    with pytest.raises(ValueError):
        shannon_check(_normal, lambda x: -np.ones(len(x)), [-12.0], [12.0])
