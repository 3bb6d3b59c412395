"""Convex bodies, support functions, mean widths and Steiner fits."""
from __future__ import annotations

from math import gamma, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logconc import IndicatorBody
from logconc.bodies import (
    Ball,
    Box,
    Polytope,
    Segment,
    mc_volume,
    mean_width_body,
    mean_width_body_limit,
    sphere_abs_coordinate_mean,
    steiner_fit,
    support_body,
    unit_ball_volume,
    urysohn_body_gap,
)
from logconc.meanwidth import mean_width

SQUARE = Box([-1.0, -1.0], [1.0, 1.0])


def _e_norm(n):
    """E|g| for a standard Gaussian vector in R^n."""
    return sqrt(2) * gamma((n + 1) / 2) / gamma(n / 2)


# --------------------------------------------------------------------------
# support functions and geometry
# --------------------------------------------------------------------------

def test_support_examples():
    x = np.array([[3.0, 4.0], [-1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(support_body(Ball(2.0, [1.0, 0.0]), x), [13.0, 1.0, 0.0])
    np.testing.assert_allclose(support_body(SQUARE, x), [7.0, 1.0, 0.0])
    np.testing.assert_allclose(support_body(Segment([0.0, 0.0], [1.0, 1.0]), x), [7.0, 0.0, 0.0])
    tri = Polytope([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(support_body(tri, x), [6.0, 0.0, 0.0])


def test_membership_and_distance():
    tri = Polytope([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    assert tri.contains([0.5, 0.25]) and not tri.contains([2.0, 1.0])
    assert tri.distance([[-1.0, 0.0]])[0] == pytest.approx(1.0)
    assert SQUARE.distance([[2.0, 2.0]])[0] == pytest.approx(sqrt(2))
    assert Segment([0.0, 0.0], [1.0, 0.0]).distance([[0.5, 2.0]])[0] == pytest.approx(2.0)
    assert Ball(1.0, dim=3).distance([[0.0, 0.0, 3.0]])[0] == pytest.approx(2.0)


def test_polytope_volume_and_3d_distance():
    cube = Polytope(np.array(np.meshgrid([0, 1], [0, 1], [0, 1])).reshape(3, -1).T)
    assert cube.volume() == pytest.approx(1.0)
    assert cube.distance([[0.5, 0.5, 2.0]])[0] == pytest.approx(1.0)
    assert cube.distance([[2.0, 2.0, 2.0]])[0] == pytest.approx(sqrt(3))


def test_body_errors():
    with pytest.raises(ValueError):
        Ball(1.0)
    with pytest.raises(ValueError):
        Ball(-1.0, dim=2)
    with pytest.raises(ValueError):
        Box([1.0], [0.0])
    with pytest.raises(ValueError):
        SQUARE.support(np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.0, 5.0), seed=st.integers(0, 10**6))
def test_support_is_linear_in_scaling_and_translation(lam, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=2)
    x = rng.normal(size=(20, 2))
    for K in (Ball(0.7, rng.normal(size=2)), SQUARE, Segment(rng.normal(size=2), rng.normal(size=2)),
              Polytope(rng.normal(size=(7, 2)))):
        np.testing.assert_allclose(K.scaled(lam).support(x), lam * K.support(x), atol=1e-12)
        np.testing.assert_allclose(K.translated(a).support(x), K.support(x) + x @ a, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_support_is_sublinear(seed):
    rng = np.random.default_rng(seed)
    K = Polytope(rng.normal(size=(9, 3)))
    x, y = rng.normal(size=(2, 10, 3))
    assert np.all(K.support(x + y) <= K.support(x) + K.support(y) + 1e-12)


# --------------------------------------------------------------------------
# mean width
# --------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 10])
def test_unit_ball_has_unit_mean_width(n):
    assert mean_width_body(Ball(1.0, dim=n)).value == 1.0


def test_square_and_segment_closed_forms():
    assert mean_width_body(SQUARE).value == pytest.approx(4 / pi, rel=1e-14)
    assert mean_width_body(Segment([-1.0, 0.0], [1.0, 0.0])).value == pytest.approx(2 / pi, rel=1e-14)
    assert sphere_abs_coordinate_mean(2) == pytest.approx(2 / pi, rel=1e-14)
    assert sphere_abs_coordinate_mean(3) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("K", [SQUARE, Box([0.0, 0.0, -1.0], [1.0, 2.0, 0.5]), Ball(1.3, dim=3)])
def test_monte_carlo_agrees_with_closed_form(K):
    mc = mean_width_body(K, method="monte_carlo", n_samples=200_000, seed=2)
    assert abs(mc.value - mean_width_body(K).value) <= 4 * mc.std_error + 1e-12


def test_polytope_mean_width_by_monte_carlo():
    # the square as a vertex list has no closed form path
    sq = Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    mc = mean_width_body(sq, n_samples=200_000, seed=1)
    assert mc.method == "monte_carlo"
    assert abs(mc.value - 4 / pi) <= 4 * mc.std_error


@pytest.mark.parametrize("K,expected", [(Ball(1.0, dim=2), 1.0), (SQUARE, 4 / pi), (Ball(0.0, dim=2), 0.0)])
def test_limit_path(K, expected):
    rep = mean_width_body_limit(K, n_samples=400_000, seed=3)
    assert abs(rep.value - expected) <= max(5 * rep.std_error, 1e-12)
    assert rep.std_error < 0.02


def test_limit_path_dimension_check():
    with pytest.raises(ValueError):
        mean_width_body_limit(Ball(1.0, dim=4))


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_functional_bridge(n):
    lo = -np.arange(1, n + 1) / 2
    hi = np.ones(n)
    K = Box(lo, hi)
    fun = mean_width(IndicatorBody(K)).value
    assert fun == pytest.approx(2 / n * _e_norm(n) * mean_width_body(K).value, rel=1e-12)
    B = Ball(0.8, np.zeros(n))
    assert mean_width(IndicatorBody(B)).value == pytest.approx(2 / n * _e_norm(n) * 0.8, rel=1e-10)


# --------------------------------------------------------------------------
# volumes and Steiner polynomials
# --------------------------------------------------------------------------

def test_unit_ball_volume():
    assert unit_ball_volume(2) == pytest.approx(pi)
    assert unit_ball_volume(3) == pytest.approx(4 * pi / 3)


def test_mc_volume_square_plus_disc():
    v, e = mc_volume(SQUARE, 0.5, 400_000, seed=0)
    exact = 4 + 4 * 2 * 0.5 + pi * 0.25
    assert abs(v - exact) <= 4 * e


def test_steiner_disc():
    rep = steiner_fit(Ball(1.0, dim=2), n_samples=300_000, seed=1)
    np.testing.assert_allclose(rep.quermass, [pi, pi, pi], rtol=2e-2)
    assert rep.v1_over_mean_width == pytest.approx(1.0, abs=2e-2)
    assert abs(rep.volume_check) < 0.05


def test_steiner_square():
    rep = steiner_fit(SQUARE, n_samples=300_000, seed=2)
    np.testing.assert_allclose(rep.quermass, [pi, 4.0, 4.0], rtol=2e-2)
    assert rep.to_dict()["quermass"] == rep.quermass.tolist()


def test_steiner_segment():
    rep = steiner_fit(Segment([-1.0, 0.0], [1.0, 0.0]), n_samples=300_000, seed=3)
    assert rep.quermass[1] == pytest.approx(2.0, rel=2e-2)
    assert abs(rep.quermass[2]) < 0.05
    assert rep.v1_over_mean_width == pytest.approx(1.0, abs=2e-2)


def test_steiner_input_errors():
    with pytest.raises(ValueError):
        steiner_fit(Ball(1.0, dim=4))
    with pytest.raises(ValueError):
        steiner_fit(Ball(0.0, dim=2))
    with pytest.raises(ValueError):
        steiner_fit(SQUARE, radii=[0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        steiner_fit(SQUARE, radii=[1.0, 1.0 + 1e-9, 1.0 + 2e-9, 1.0 + 3e-9])


# --------------------------------------------------------------------------
# classical Urysohn
# --------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(4))
def test_classical_urysohn_on_random_polytopes(seed):
    K = Polytope(np.random.default_rng(seed).normal(size=(8, 2)))
    out = urysohn_body_gap(K, n_samples=100_000, seed=seed, volume_samples=200_000)
    sigma = out["mean_width_error"] + out["volume_error"]
    assert out["gap"] >= -4 * sigma


def test_classical_urysohn_equality_for_the_disc():
    out = urysohn_body_gap(Ball(1.0, dim=2), n_samples=100_000, volume_samples=400_000)
    assert abs(out["gap"]) < 0.01
