"""Asplund products, homotheties, scaling, translation, rotation and truncation."""
from __future__ import annotations

from math import log

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from logconc import (
    GridPotential,
    GridSpec,
    IndicatorBody,
    LogConcaveFn,
    Quadratic,
    RadialPotential,
    asplund,
    conjugate,
    homothety,
    rotate,
    sample_on_grid,
    scalar_mult,
    translate,
    truncate,
)
from logconc.bodies import Ball, Box, Polytope
from logconc.calculus import TOL_INFCONV_1D, TOL_INFCONV_ND, as_radial, asplund_direct
from logconc.core import INF, gaussian_profile, norm_cone_profile
from logconc.core.analytic import BodyMoreau
from logconc.legendre import h_profile


def _grid1(lo, hi, m, fn):
    spec = GridSpec.from_bounds([lo], [hi], m)
    return GridPotential(spec, fn(spec.axes()[0]))


def _finite_close(a, b, tol):
    fa, fb = np.isfinite(a), np.isfinite(b)
    assert np.array_equal(fa, fb)
    scale = max(1.0, float(np.abs(a[fa]).max()))
    assert np.max(np.abs(a[fa] - b[fa])) <= tol * scale


# --------------------------------------------------------------------------
# Asplund product
# --------------------------------------------------------------------------

def test_interval_indicators_add():
    res = asplund(IndicatorBody(Box([-1.0], [0.0])), IndicatorBody(Box([0.0], [2.0])))
    assert isinstance(res, IndicatorBody)
    np.testing.assert_array_equal(res.body.lower, [-1.0])
    np.testing.assert_array_equal(res.body.upper, [2.0])


def test_interval_indicators_add_on_grids():
    p = _grid1(-1, 0, 11, np.zeros_like)
    q = _grid1(0, 2, 21, np.zeros_like)
    res = asplund(p, q)
    assert res.spec.origin[0] == pytest.approx(-1.0) and res.spec.upper[0] == pytest.approx(2.0)
    assert np.all(res.values == 0.0)


def test_gaussian_square_is_two_dot_gaussian():
    G = Quadratic(3)
    lhs = asplund(G, G)
    rhs = homothety(2.0, G)
    x = np.random.default_rng(0).normal(size=(30, 3)) * 3
    np.testing.assert_allclose(lhs(x), rhs(x), rtol=1e-14)
    np.testing.assert_allclose(lhs(x), np.sum(x * x, axis=1) / 4, rtol=1e-14)


def test_radial_gaussian_square():
    G = RadialPotential(gaussian_profile(), 50)
    x = np.random.default_rng(0).normal(size=(10, 50))
    np.testing.assert_allclose(asplund(G, G)(x), np.sum(x * x, axis=1) / 4, rtol=1e-13)


def test_logconcavefn_in_and_out():
    out = asplund(LogConcaveFn(Quadratic(1)), LogConcaveFn(Quadratic(1)))
    assert isinstance(out, LogConcaveFn)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        asplund(Quadratic(1), Quadratic(2))


def test_no_rule_for_anisotropic_pair():
    with pytest.raises(NotImplementedError):
        asplund(RadialPotential(norm_cone_profile(), 2), Quadratic(2, precision=[[2.0, 0.0], [0.0, 1.0]]))
    assert isinstance(asplund(RadialPotential(norm_cone_profile(), 2), Quadratic(2, precision=2.0)), RadialPotential)


@pytest.mark.parametrize("eps", [0.5, 0.1])
def test_gaussian_times_eps_f_matches_h_profile(eps):
    spec = GridSpec.from_bounds([-1.0, -1.0], [1.0, 1.5], 11)
    x = spec.nodes()
    f = GridPotential(spec, (np.abs(x[:, 0]) + 0.5 * x[:, 1] ** 2).reshape(spec.shape))
    out = GridSpec.from_bounds([-3.0, -3.0], [3.0, 3.0], 13)
    prod = asplund(Quadratic(2), homothety(eps, f), out_grid=out)
    nodes = out.nodes()
    expected = 0.5 * np.sum(nodes * nodes, axis=1) - eps * h_profile(f, eps)(nodes)
    np.testing.assert_allclose(prod.values.ravel(), expected, atol=1e-12)


def test_conjugate_path_matches_direct_1d():
    rng = np.random.default_rng(4)
    for _ in range(10):
        p = _grid1(-2, 1, 61, lambda t: rng.uniform(0.2, 2) * t * t + rng.normal() * t)
        q = _grid1(-1, 2, 61, lambda t: np.abs(t - rng.uniform(-1, 2)) + rng.uniform(0, 1) * t * t)
        fast = asplund(p, q)
        slow = asplund(p, q, fast.spec, method="direct")
        _finite_close(fast.values, slow.values, TOL_INFCONV_1D)


def test_conjugate_path_matches_direct_2d():
    spec = GridSpec.from_bounds([-2.0, -2.0], [2.0, 2.0], 17)
    x = spec.nodes()
    p = GridPotential(spec, (0.5 * x[:, 0] ** 2 + x[:, 1] ** 2 + 0.3 * x[:, 0] * x[:, 1]).reshape(spec.shape))
    q = GridPotential(spec, np.abs(x).sum(axis=1).reshape(spec.shape))
    fast = asplund(p, q)
    slow = asplund(p, q, fast.spec, method="direct")
    _finite_close(fast.values, slow.values, TOL_INFCONV_ND)


def test_commutative_and_associative():
    rng = np.random.default_rng(8)
    a = _grid1(-1, 1, 21, lambda t: t * t + 0.2 * t)
    b = _grid1(-1, 2, 31, lambda t: np.abs(t - 0.5))
    c = _grid1(0, 1, 11, lambda t: rng.uniform(0.5, 1) * (t - 0.3) ** 2)
    ab, ba = asplund(a, b), asplund(b, a)
    _finite_close(ab.values, ba.values, TOL_INFCONV_1D)
    left = asplund(ab, c)
    right = asplund(a, asplund(b, c))
    assert left.spec == right.spec
    _finite_close(left.values, right.values, TOL_INFCONV_1D)


def test_support_linearity_on_aligned_grids():
    lam = 2.0
    f = _grid1(-1, 1, 41, lambda t: t * t)  # spacing 0.05, becomes 0.1 after the homothety
    g = _grid1(-1, 2, 31, lambda t: np.abs(t - 0.5))  # spacing 0.1
    prod = asplund(homothety(lam, f), g)
    s = np.linspace(-3, 3, 61)[:, None]
    lhs = conjugate(prod)(s)
    rhs = lam * conjugate(f)(s) + conjugate(g)(s)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(0.1, 5.0), seed=st.integers(0, 10**6), n=st.integers(1, 4))
def test_support_linearity_closed_form(lam, seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    f = Quadratic(n, rng.normal(size=n), rng.normal(), A @ A.T + np.eye(n))
    g = Quadratic(n, rng.normal(size=n), rng.normal(), np.diag(rng.uniform(0.5, 2, n)))
    x = rng.normal(size=(20, n))
    lhs = conjugate(asplund(homothety(lam, f), g))(x)
    rhs = lam * conjugate(f)(x) + conjugate(g)(x)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_body_times_gaussian_is_moreau_envelope():
    K = Box([-1.0, 0.0], [1.0, 0.5])
    prod = asplund(IndicatorBody(K, 0.3), Quadratic(2, [0.5, 0.0], 0.2))
    assert isinstance(prod, BodyMoreau)
    spec = GridSpec.from_bounds([-1.0, 0.0], [1.0, 0.5], 41)
    out = GridSpec.from_bounds([-2.0, -1.5], [3.0, 2.0], 11)
    direct = asplund_direct(sample_on_grid(IndicatorBody(K, 0.3), spec), Quadratic(2, [0.5, 0.0], 0.2), out)
    np.testing.assert_allclose(prod(out.nodes()), direct.values.ravel(), atol=1e-3)
    # the box integral separates
    assert np.exp(prod.log_integral()) == pytest.approx(np.exp(-0.5) * (2 + np.sqrt(2 * np.pi)) * (0.5 + np.sqrt(2 * np.pi)))


# --------------------------------------------------------------------------
# homothety, scaling, translation, rotation
# --------------------------------------------------------------------------

def test_homothety_identity():
    f = _grid1(-1, 1, 21, lambda t: t * t)
    np.testing.assert_array_equal(homothety(1.0, f).values, f.values)


def test_homothety_of_box_indicator():
    out = homothety(2.5, IndicatorBody(Box([-1.0, -1.0], [1.0, 1.0])))
    np.testing.assert_allclose(out.body.upper, [2.5, 2.5])


def test_homothety_sum_law_on_grid_gaussian():
    f = sample_on_grid(Quadratic(1), GridSpec.from_bounds([-3.0], [3.0], 61))
    lhs = asplund(homothety(1.0, f), homothety(1.0, f))
    rhs = homothety(2.0, f)
    np.testing.assert_allclose(lhs.spec.origin, rhs.spec.origin)
    np.testing.assert_allclose(lhs.spec.upper, rhs.spec.upper)
    # the sum grid is twice as fine; compare on the coarse nodes
    _finite_close(lhs(rhs.spec.nodes()), rhs.values.ravel(), TOL_INFCONV_1D)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.1, 5), b=st.floats(0.1, 5))
def test_homothety_composition(a, b):
    f = _grid1(-1, 2, 31, lambda t: (t - 0.5) ** 2)
    lhs = homothety(a, homothety(b, f))
    rhs = homothety(a * b, f)
    np.testing.assert_allclose(lhs.spec.origin, rhs.spec.origin, rtol=1e-14)
    np.testing.assert_allclose(lhs.values, rhs.values, rtol=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_factors_rejected(bad):
    with pytest.raises(ValueError):
        homothety(bad, Quadratic(1))
    with pytest.raises(ValueError):
        scalar_mult(bad, Quadratic(1))
    with pytest.raises(ValueError):
        truncate(Quadratic(1), bad)


def test_scalar_mult_identity_and_support_shift():
    f = Quadratic(2, [0.5, 0.5])
    x = np.random.default_rng(0).normal(size=(10, 2))
    np.testing.assert_array_equal(scalar_mult(1.0, f)(x), f(x))
    a = 7.0
    np.testing.assert_allclose(conjugate(scalar_mult(a, f))(x), conjugate(f)(x) + log(a), rtol=1e-14)


def test_translate_adds_linear_term_to_conjugate():
    a = np.array([0.7, -0.2])
    f = Quadratic(2, precision=[[2.0, 0.1], [0.1, 1.0]])
    x = np.random.default_rng(1).normal(size=(10, 2))
    np.testing.assert_allclose(conjugate(translate(f, a))(x), conjugate(f)(x) + x @ a, rtol=1e-12, atol=1e-12)
    assert translate(f, np.zeros(2))(x[0]) == f(x[0])


@pytest.mark.parametrize("eps", [0.5, 0.05])
def test_translate_keeps_integral_of_gaussian_product(eps):
    f = Quadratic(2, [0.3, 0.0], 0.1, [[2.0, 0.3], [0.3, 1.0]])
    G = Quadratic(2)
    lhs = asplund(G, homothety(eps, translate(f, [1.5, -2.0]))).log_integral()
    rhs = asplund(G, homothety(eps, f)).log_integral()
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_grid_translate_shifts_origin():
    f = _grid1(-1, 1, 21, np.abs)
    g = translate(f, [0.33])
    assert g.spec.origin[0] == pytest.approx(-0.67)
    assert g([0.33]) == pytest.approx(0.0)


def test_rotate_families():
    rng = np.random.default_rng(5)
    U = ortho_group.rvs(3, random_state=rng)
    x = rng.normal(size=(20, 3))
    for f in (Quadratic(3, [1.0, 0.0, -1.0], 0.0, [[2, 0.2, 0], [0.2, 1, 0], [0, 0, 0.5]]),
              IndicatorBody(Ball(1.5, [0.2, 0.0, 0.1])),
              IndicatorBody(Box([-1.0, -0.5, 0.0], [1.0, 0.5, 2.0])),
              RadialPotential(gaussian_profile(), 3)):
        np.testing.assert_allclose(rotate(f, U)(x), f(x @ U.T), atol=1e-12)
    poly = IndicatorBody(Polytope(rng.normal(size=(6, 3))))
    np.testing.assert_allclose(rotate(poly, U)(x), poly(x @ U.T))
    with pytest.raises(ValueError):
        rotate(Quadratic(3), np.ones((3, 3)))


# --------------------------------------------------------------------------
# truncation
# --------------------------------------------------------------------------

def test_truncate_gaussian_only_clips_support():
    spec = GridSpec.from_bounds([-4.0, -4.0], [4.0, 4.0], 33)
    f = sample_on_grid(Quadratic(2), spec)
    t = truncate(f, 2.0)
    r = np.linalg.norm(spec.nodes(), axis=1).reshape(spec.shape)
    np.testing.assert_array_equal(t.values[r <= 2], f.values[r <= 2])
    assert np.all(np.isinf(t.values[r > 2]))


def test_truncate_clips_values_at_k():
    spec = GridSpec.from_bounds([-2.0], [2.0], 41)
    eG = sample_on_grid(Quadratic(1, offset=-1.0), spec)  # e * G
    t = truncate(eG, 1.0)
    fin = np.isfinite(t.values)
    assert np.all(np.exp(-t.values[fin]) <= 1.0 + 1e-15)
    assert t([0.0]) == 0.0


def test_truncate_radial_exact():
    f = RadialPotential(gaussian_profile(-1.0), 5)
    t = truncate(f, 1.0)
    assert t.profile.end == 1.0
    r = np.linspace(0, 1, 11)
    np.testing.assert_allclose(t.profile(r), np.maximum(r * r / 2 - 1, 0.0), atol=1e-14)
    assert as_radial(Quadratic(4)) is not None


def test_truncation_ladder_monotone():
    spec = GridSpec.from_bounds([-5.0, -5.0], [5.0, 5.0], 41)
    f = sample_on_grid(RadialPotential(norm_cone_profile(1.0, -0.5), 2), spec)
    prev = None
    for k in range(1, 9):
        fk = np.exp(-truncate(f, float(k)).values)
        if prev is not None:
            assert np.all(fk >= prev)
        prev = fk
    assert np.all(prev <= np.exp(-f.values) + 1e-15)


def test_truncate_closed_form_needs_grid():
    with pytest.raises(NotImplementedError):
        truncate(Quadratic(2, [1.0, 0.0]), 2.0)
    out = truncate(Quadratic(2, [1.0, 0.0]), 2.0, out_grid=GridSpec.from_bounds([-3.0, -3.0], [3.0, 3.0], 13))
    assert out([0.0, 0.0]) == pytest.approx(0.5)
    assert out([2.5, 0.0]) == INF
