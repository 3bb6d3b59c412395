"""Potentials, evaluation, convexity screens and file formats."""
from __future__ import annotations

from math import lgamma, log, pi

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
    PiecewiseQuadraticProfile,
    Quadratic,
    RadialPotential,
    convexity_screen,
    gaussian,
    sample_on_grid,
)
from logconc.bodies import Ball, Box
from logconc.core import (
    INF,
    counterexample_profile,
    eval_potential,
    format_grid,
    gaussian_profile,
    norm_cone_profile,
    parse_grid,
    read_grid,
    write_grid,
)
from logconc.core.specfile import SpecError, build_body, build_potential, parse_keyvalue


def test_quadratic_at_3_4():
    assert eval_potential(Quadratic(2), [3.0, 4.0]) == 12.5


def test_ball_indicator_outside_is_inf():
    assert eval_potential(IndicatorBody(Ball(1.0, dim=2)), [2.0, 0.0]) == INF


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        eval_potential(Quadratic(2), [1.0, 2.0, 3.0])


def test_grid_abs_interpolation():
    spec = GridSpec.from_bounds([-4.0], [4.0], 81)
    phi = sample_on_grid(RadialPotential(norm_cone_profile(), 1), spec)
    t = np.linspace(-3.95, 3.95, 200)
    err = np.abs(phi(t[:, None]) - np.abs(t))
    assert abs(phi([0.05]) - 0.05) <= spec.spacing[0]
    assert err.max() <= spec.spacing[0]


def test_grid_outside_box_and_inf_neighbour():
    spec = GridSpec.from_bounds([0.0], [1.0], 3)
    phi = GridPotential(spec, [0.0, 1.0, INF])
    assert phi([1.5]) == INF
    assert phi([0.75]) == INF
    assert phi([0.5]) == 1.0
    assert phi([0.25]) == 0.5


@pytest.mark.parametrize("vals", [[0.0, np.nan], [0.0, -np.inf], [INF, INF]])
def test_grid_rejects_bad_values(vals):
    with pytest.raises(ValueError):
        GridPotential(GridSpec.from_bounds([0.0], [1.0], 2), vals)


def test_screen_passes_parabola():
    spec = GridSpec.from_bounds([-3.0], [3.0], 61)
    assert convexity_screen(GridPotential(spec, spec.axes()[0] ** 2 / 2)).passed


def test_screen_fails_concave_with_interior_witness():
    spec = GridSpec.from_bounds([-3.0], [3.0], 61)
    res = convexity_screen(GridPotential(spec, -spec.axes()[0] ** 2))
    assert not res.passed
    assert len(res.witness) == 3
    assert 0 < res.witness[1][0] < 60


def test_screen_fails_on_domain_hole():
    spec = GridSpec.from_bounds([0.0], [4.0], 5)
    res = convexity_screen(GridPotential(spec, [0.0, 0.0, INF, 0.0, 0.0]))
    assert not res.passed and "infinite" in res.detail


def test_screen_passes_counterexample_grid():
    n = 10
    spec = GridSpec.from_bounds([-12.0], [12.0], 241)
    prof = counterexample_profile(n)
    phi = GridPotential(spec, prof(np.abs(spec.axes()[0])))
    assert convexity_screen(phi).passed
    assert convexity_screen(RadialPotential(prof, n)).passed


def test_screen_two_dim_diagonals():
    spec = GridSpec.from_bounds([-2.0, -2.0], [2.0, 2.0], 21)
    x = spec.nodes()
    good = GridPotential(spec, np.sum(x * x, axis=1))
    saddle = GridPotential(spec, x[:, 0] ** 2 + x[:, 1] ** 2 - 3 * x[:, 0] * x[:, 1])
    assert convexity_screen(good).passed
    assert not convexity_screen(saddle).passed


def test_radial_screen_rejects_concave_piece():
    prof = PiecewiseQuadraticProfile((0.0, 1.0), (-1.0,), (3.0,), (0.0,))  # increasing, concave
    assert not convexity_screen(prof).passed
    with pytest.raises(ValueError):
        RadialPotential(prof, 3)


def test_counterexample_continuity():
    n = 16
    prof = counterexample_profile(n)
    s = np.sqrt(n)
    assert prof(np.array([s]))[0] == pytest.approx(0.0, abs=1e-12)
    assert prof(np.array([2 * s]))[0] == pytest.approx(2 * n, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 40), seed=st.integers(0, 2**32 - 1))
def test_radial_rotation_invariance(n, seed):
    rng = np.random.default_rng(seed)
    phi = RadialPotential(counterexample_profile(n), n)
    x = rng.normal(size=(8, n)) * np.sqrt(n)
    U = ortho_group.rvs(n, random_state=rng)
    np.testing.assert_allclose(phi(x @ U.T), phi(x), rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(vals=st.lists(st.floats(-50, 50), min_size=3, max_size=40))
def test_f_in_unit_interval_when_phi_nonnegative(vals):
    v = np.abs(np.array(vals))
    f = LogConcaveFn(GridPotential(GridSpec.from_bounds([0.0], [1.0], len(v)), v))
    out = f(np.linspace(0, 1, 17)[:, None])
    assert np.all((out >= 0) & (out <= 1))


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.1, 3.0), b=st.floats(-2, 2), c=st.floats(-2, 2), seed=st.integers(0, 10**6))
def test_screened_grid_is_midpoint_convex(a, b, c, seed):
    spec = GridSpec.from_bounds([-3.0], [3.0], 61)
    t = spec.axes()[0]
    phi = GridPotential(spec, np.maximum(a * (t - b) ** 2, np.abs(t - c)))
    assert convexity_screen(phi).passed
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(-3, 3, (2, 50))
    mid = phi(((x + y) / 2)[:, None])
    ends = 0.5 * (phi(x[:, None]) + phi(y[:, None]))
    # linear interpolation of convex node data stays convex
    assert np.all(mid <= ends + 1e-12)


def test_log_integrals_closed_forms():
    assert Quadratic(3).log_integral() == pytest.approx(1.5 * log(2 * pi), abs=1e-13)
    assert IndicatorBody(Box([-1.0, 0.0], [1.0, 3.0])).log_integral() == pytest.approx(log(6.0))
    n = 4
    cone = RadialPotential(norm_cone_profile(), n)
    # int e^-|x| = |S^{n-1}| Gamma(n)
    expected = log(2) + n / 2 * log(pi) - lgamma(n / 2) + lgamma(n)
    assert cone.log_integral() == pytest.approx(expected, rel=1e-10)


def test_grid_log_integral_against_quad():
    spec = GridSpec.from_bounds([-6.0], [6.0], 241)
    phi = sample_on_grid(Quadratic(1, [0.4], 0.3), spec)
    # exact integral of exp(-linear interpolant), cell by cell
    v = phi.values
    d = np.diff(v)
    h = spec.spacing[0]
    cells = h * np.exp(-v[:-1]) * np.where(np.abs(d) > 1e-12, -np.expm1(-d) / np.where(d == 0, 1, d), 1.0)
    assert phi.log_integral() == pytest.approx(log(cells.sum()), abs=1e-6)


def test_gaussian_helper():
    g = gaussian(2, [1.0, 0.0], 0.5)
    assert g([1.0, 0.0]) == 0.5
    assert g.is_isotropic


def test_grid_file_round_trip(tmp_path):
    spec = GridSpec.from_bounds([-1.0, 0.0], [1.0, 2.0], [3, 4])
    vals = np.arange(12, dtype=float).reshape(3, 4)
    vals[0, 0] = INF
    phi = GridPotential(spec, vals)
    path = tmp_path / "g.lcgrid"
    write_grid(phi, path, comment="round trip")
    back = read_grid(path)
    assert back.spec == phi.spec
    np.testing.assert_array_equal(back.values, phi.values)
    assert "inf" in format_grid(phi)


@pytest.mark.parametrize("text,line", [
    ("lcgrid v2 dim=1\n", 1),
    ("lcgrid v1 dim=1\norigin=0\nspacing=x\nshape=2\n0 1\n", 3),
    ("lcgrid v1 dim=1\norigin=0\nspacing=1\nshape=2\n0 nan\n", 5),
    ("lcgrid v1 dim=1\norigin=0\nspacing=1\nshape=2\n0 -inf\n", 5),
])
def test_grid_parse_errors_name_line(text, line):
    with pytest.raises(ValueError, match=f":{line}:"):
        parse_grid(text, "bad")


def test_grid_parse_count_mismatch():
    with pytest.raises(ValueError, match="expected 3 values"):
        parse_grid("lcgrid v1 dim=1\norigin=0\nspacing=1\nshape=3\n0 1\n")


def test_spec_builds_each_kind(tmp_path):
    g = build_potential(parse_keyvalue("kind = gaussian\ndim = 2\ncenter = 1 0\noffset = 0.5\n"))
    assert g([1.0, 0.0]) == 0.5
    b = build_potential(parse_keyvalue("kind = indicator_box\nlower = -1 -1\nupper = 1 1\n"))
    assert b([0.5, 0.5]) == 0.0 and b([2.0, 0.0]) == INF
    c = build_potential(parse_keyvalue("kind = norm_cone\ndim = 3\nalpha = 2\n"))
    assert c([3.0, 4.0, 0.0]) == pytest.approx(10.0)
    r = build_potential(parse_keyvalue("kind = radial_piecewise\ndim = 9\npreset = counterexample\n"))
    assert r([6.0] + [0.0] * 8) == pytest.approx(18.0)
    pw = build_potential(parse_keyvalue("kind = radial_piecewise\ndim = 2\nknots = 0 1 inf\n"
                                        "piece = 0 0 0\npiece = 0 1 -1\n"))
    assert pw([3.0, 0.0]) == pytest.approx(2.0)
    ball = build_potential(parse_keyvalue("kind = indicator_ball\ndim = 2\nradius = 2\n"))
    assert ball([1.9, 0.0]) == 0.0
    grid_file = tmp_path / "g.lcgrid"
    write_grid(GridPotential(GridSpec.from_bounds([0.0], [1.0], 2), [0.0, 1.0]), grid_file)
    spec_file = tmp_path / "f.spec"
    spec_file.write_text("kind = grid_file\npath = g.lcgrid\n")
    from logconc.core.specfile import read_keyvalue
    assert build_potential(read_keyvalue(spec_file))([0.5]) == 0.5


@pytest.mark.parametrize("text,key", [
    ("kind = gaussian\ndim = 2\nradius = 1\n", "radius"),
    ("kind = blob\n", "kind"),
    ("kind = gaussian\ndim = -1\n", "dim"),
    ("kind = indicator_box\nlower = 0 0\nupper = 1 -1\n", "upper"),
    ("kind = radial_piecewise\ndim = 2\nknots = 0 1\n", "piece"),
])
def test_spec_errors_name_key(text, key):
    with pytest.raises(SpecError, match=f"'{key}'"):
        build_potential(parse_keyvalue(text))


def test_spec_error_has_line_number():
    with pytest.raises(SpecError, match=r"<spec>:3"):
        build_potential(parse_keyvalue("kind = gaussian\ndim = 2\nbogus = 1\n"))


def test_body_specs():
    assert build_body(parse_keyvalue("body = ball\nradius = 2\ndim = 3\n")).radius == 2.0
    poly = build_body(parse_keyvalue("body = polytope\nvertex = 0 0\nvertex = 1 0\nvertex = 0 1\n"))
    assert poly.volume() == pytest.approx(0.5)
    seg = build_body(parse_keyvalue("body = segment\nstart = 0 0\nend = 2 0\n"))
    assert seg.volume() == 0.0
    with pytest.raises(SpecError, match="'body'"):
        build_body(parse_keyvalue("body = torus\n"))


def test_radial_gaussian_matches_quadratic():
    n = 5
    x = np.random.default_rng(0).normal(size=(20, n))
    np.testing.assert_allclose(RadialPotential(gaussian_profile(), n)(x), Quadratic(n)(x), rtol=1e-14)
