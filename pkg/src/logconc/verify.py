"""Verification suites: each inequality, identity and equality case, checked on a fixed family.

Every suite returns a :class:`SuiteResult` with one row per tested
function.  Inputs are generated from a seeded RNG, so a suite is
deterministic for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import log, sqrt

import numpy as np
from scipy.stats import norm, ortho_group

from .bodies import Ball, Box
from .calculus import asplund, homothety, rotate, scalar_mult, translate, truncate
from .core import (
    GridSpec,
    IndicatorBody,
    PiecewiseQuadraticProfile,
    Quadratic,
    RadialPotential,
    ball_profile,
    counterexample_profile,
    gaussian_profile,
    norm_cone_profile,
    sample_on_grid,
)
from .core.grid import GridPotential
from .legendre import conjugate
from .meanwidth import (
    check_definition_equality,
    mean_width,
    santalo_check,
    shannon_check,
    urysohn_gap,
)

__all__ = ["SuiteResult", "SUITES", "run_suite", "urysohn_family", "equality_family", "santalo_family"]

TOL_GAP = 1e-6


@dataclass
class SuiteResult:
    name: str
    columns: list
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    def to_dict(self):
        return {"suite": self.name, "passed": self.passed, "columns": self.columns, "rows": self.rows}


# --------------------------------------------------------------------------
# test families
# --------------------------------------------------------------------------

def _spread_eigs(rng, n):
    """Eigenvalues bounded away from 1, so the quadratic is never a Gaussian of unit precision."""
    lo = rng.uniform(0.4, 0.8, n)
    hi = rng.uniform(1.25, 2.5, n)
    return np.where(rng.random(n) < 0.5, lo, hi)


def _random_quadratic(rng, n):
    U = ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    A = U @ np.diag(_spread_eigs(rng, n)) @ U.T
    return Quadratic(n, rng.normal(size=n), rng.normal(), 0.5 * (A + A.T), provenance="random quadratic")


def _random_radial_profile(rng):
    kind = rng.integers(4)
    if kind == 0:
        return gaussian_profile(rng.normal(), float(rng.choice([rng.uniform(0.3, 0.7), rng.uniform(1.5, 3.0)])))
    if kind == 1:
        r1 = rng.uniform(0.5, 2.0)
        # flat core, then a linear ramp, then quadratic growth
        s = rng.uniform(0.5, 2.0)
        r2 = r1 + rng.uniform(0.5, 2.0)
        v2 = s * (r2 - r1)
        a = rng.uniform(0.5, 2.0)
        return PiecewiseQuadraticProfile(
            (0.0, r1, r2, np.inf), (0.0, 0.0, a), (0.0, s, s - a * r2), (0.0, -s * r1, v2 - s * r2 + 0.5 * a * r2 * r2)
        )
    if kind == 2:
        return ball_profile(rng.uniform(0.5, 3.0), rng.normal())
    a = rng.uniform(0.5, 2.0)
    s = rng.uniform(0.1, 1.0)
    return PiecewiseQuadraticProfile((0.0, np.inf), (a,), (s,), (rng.normal(),))


def _random_convex_grid_1d(rng):
    spec = GridSpec.from_bounds([-3.0], [3.0], 301)
    x = spec.axes()[0]
    c = rng.uniform(-1, 1, 3)
    vals = np.maximum.reduce([
        rng.uniform(0.3, 2.0) * (x - c[0]) ** 2,
        rng.uniform(0.5, 2.0) * np.abs(x - c[1]),
        rng.uniform(-1, 1) * x + rng.uniform(0, 1),
    ]) + rng.normal()
    return GridPotential(spec, vals, provenance="random convex grid")


def urysohn_family(seed: int = 0):
    """``(name, potential, is_gaussian_family)`` triples, 53 members."""
    rng = np.random.default_rng(seed)
    fam = []
    for i in range(20):
        n = int(rng.integers(1, 4))
        fam.append((f"anisotropic quadratic #{i} (n={n})", _random_quadratic(rng, n), False))
    for i, n in enumerate((1, 2, 3, 10, 2, 3, 100, 1)):
        C = float(np.exp(rng.normal()))
        a = rng.normal(size=n) if i % 2 == 0 else np.zeros(n)
        fam.append((f"C exp(-|x-a|^2/2) #{i} (n={n})", Quadratic(n, a, -log(C)), True))
    fam.append(("radial Gaussian (n=1000)", RadialPotential(gaussian_profile(-0.7), 1000), True))
    for i in range(12):
        n = int(rng.choice([2, 3, 5, 20, 100]))
        fam.append((f"random radial #{i} (n={n})", RadialPotential(_random_radial_profile(rng), n), False))
    for i in range(6):
        fam.append((f"random convex 1-D grid #{i}", _random_convex_grid_1d(rng), False))
    for i in range(4):
        n = int(rng.integers(1, 4))
        lo = -rng.uniform(0.2, 2.0, n)
        hi = rng.uniform(0.2, 2.0, n)
        fam.append((f"box indicator #{i} (n={n})", IndicatorBody(Box(lo, hi), rng.normal()), False))
    for i, n in enumerate((2, 3)):
        fam.append((f"ball indicator #{i} (n={n})", IndicatorBody(Ball(rng.uniform(0.5, 2.0), dim=n)), False))
    return fam


def equality_family():
    g1 = GridSpec.from_bounds([-5.0], [5.0], 201)
    g2 = GridSpec.from_bounds([-5.0, -5.0], [5.0, 5.0], 41)
    cone2 = sample_on_grid(RadialPotential(norm_cone_profile(), 2), g2)
    return [
        ("grid Gaussian (n=1)", sample_on_grid(Quadratic(1), g1)),
        ("grid Gaussian (n=2)", sample_on_grid(Quadratic(2), g2)),
        ("grid anisotropic Gaussian (n=2)", sample_on_grid(Quadratic(2, [0.5, 0.0], 0.0, [2.0, 0.5]), g2)),
        ("Gaussian (n=3)", Quadratic(3)),
        ("box [-1,1]^2", IndicatorBody(Box([-1.0, -1.0], [1.0, 1.0]))),
        ("box [-1,2]", IndicatorBody(Box([-1.0], [2.0]))),
        ("ball r=1 (n=2)", IndicatorBody(Ball(1.0, dim=2))),
        ("ball r=1.5 (n=3)", IndicatorBody(Ball(1.5, dim=3))),
        ("truncated e^-|x| k=4 (radial, n=3)", truncate(RadialPotential(norm_cone_profile(), 3), 4.0)),
        ("truncated e^-|x| k=3 (grid, n=2)", truncate(cone2, 3.0)),
        ("box * grid Gaussian (n=2)", asplund(IndicatorBody(Box([-1.0, -1.0], [1.0, 1.0])), sample_on_grid(Quadratic(2), g2))),
        ("G * G (radial, n=5)", asplund(RadialPotential(gaussian_profile(), 5), RadialPotential(gaussian_profile(), 5))),
        ("e^-|x| (n=2)", RadialPotential(norm_cone_profile(), 2)),
    ]


def santalo_family():
    """``(name, potential, expected x0 or None, tolerance on x0)``."""
    g1 = GridSpec.from_bounds([-5.7], [6.3], 121)
    g2 = GridSpec.from_bounds([-4.0 + 0.3, -4.0 - 0.2], [4.0 + 0.3, 4.0 - 0.2], 33)
    return [
        ("|x|^2/2 (n=1)", Quadratic(1), np.zeros(1), 1e-12),
        ("|x|^2/2 (n=2)", Quadratic(2), np.zeros(2), 1e-12),
        ("|x|^2/2 (n=3)", Quadratic(3), np.zeros(3), 1e-12),
        ("|x-a|^2/2 (n=2)", Quadratic(2, [1.0, -2.0]), np.array([1.0, -2.0]), 1e-12),
        ("anisotropic quadratic (n=2)", Quadratic(2, [0.5, 0.5], 1.0, [[2.0, 0.5], [0.5, 1.0]]), np.array([0.5, 0.5]), 1e-12),
        ("box [-1,1]^2", IndicatorBody(Box([-1.0, -1.0], [1.0, 1.0])), np.zeros(2), 1e-12),
        ("box [0,2]x[-1,3]", IndicatorBody(Box([0.0, -1.0], [2.0, 3.0])), np.array([1.0, 1.0]), 1e-12),
        ("ball r=2 (n=3)", IndicatorBody(Ball(2.0, dim=3)), np.zeros(3), 1e-12),
        ("counterexample profile (n=10)", RadialPotential(counterexample_profile(10), 10), np.zeros(10), 1e-12),
        ("grid |x-0.3|^2/2 (n=1)", sample_on_grid(Quadratic(1, [0.3]), g1), np.array([0.3]), g1.spacing[0]),
        ("grid |x-a|^2/2 (n=2)", sample_on_grid(Quadratic(2, [0.3, -0.2]), g2), np.array([0.3, -0.2]), g2.spacing[0]),
        ("grid |x| on [-2,3]", GridPotential(GridSpec.from_bounds([-2.0], [3.0], 101),
                                             np.abs(GridSpec.from_bounds([-2.0], [3.0], 101).axes()[0])), None, None),
    ]


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------

def suite_equality(seed: int = 0) -> SuiteResult:
    res = SuiteResult("equality", ["function", "m_star", "m_tilde", "rel_gap", "pass"])
    for name, f in equality_family():
        r = check_definition_equality(f)
        res.rows.append({"function": name, "m_star": r["m_star"], "m_tilde": r["m_tilde"],
                         "rel_gap": r["rel_gap"], "pass": r["passed"]})
    return res


def suite_urysohn(seed: int = 0) -> SuiteResult:
    res = SuiteResult("urysohn", ["function", "m_star", "rhs", "gap", "equality", "expected_equality", "pass"])
    for name, f, gaussian in urysohn_family(seed):
        r = urysohn_gap(f)
        ok = r["gap"] >= -TOL_GAP and r["equality"] == gaussian
        res.rows.append({"function": name, "m_star": r["m_star"], "rhs": r["rhs"], "gap": r["gap"],
                         "equality": r["equality"], "expected_equality": gaussian, "pass": bool(ok)})
    return res


def suite_santalo(seed: int = 0) -> SuiteResult:
    res = SuiteResult("santalo", ["function", "x0", "ratio", "x0_error", "pass"])
    for name, phi, x_exp, x_tol in santalo_family():
        r = santalo_check(phi)
        ok = r["passed"]
        err = None
        if x_exp is not None:
            err = float(np.max(np.abs(np.asarray(r["x0"]) - x_exp)))
            ok = ok and err <= x_tol
        if "|x|^2/2" in name and x_exp is not None and not isinstance(phi, GridPotential):
            ok = ok and abs(r["ratio"] - 1) <= 1e-6
        x0 = r["x0"] if len(r["x0"]) <= 3 else f"{len(r['x0'])}-vector, max |x0_i| {max(map(abs, r['x0'])):.1e}"
        res.rows.append({"function": name, "x0": x0, "ratio": r["ratio"], "x0_error": err, "pass": bool(ok)})
    return res


def suite_shannon(seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult("shannon", ["case", "lhs", "rhs", "gap", "equality", "pass"])
    p = lambda x: norm.pdf(x[:, 0])
    cases = [
        ("q = p", p, lambda x: norm.pdf(x[:, 0]), True),
        ("q = 5p", p, lambda x: 5 * norm.pdf(x[:, 0]), True),
        ("q = exp(-h) for f = 1_[-1,1]", p, lambda x: np.exp(-np.abs(x[:, 0])), False),
    ]
    for i in range(5):
        s, m, a = rng.uniform(0.5, 2.0), rng.normal(), rng.uniform(0.5, 3)
        s2, m2 = rng.uniform(0.5, 2.0), rng.normal()
        cases.append((f"random Gaussians #{i}",
                      lambda x, s=s, m=m: norm.pdf(x[:, 0], m, s),
                      lambda x, s2=s2, m2=m2, a=a: a * norm.pdf(x[:, 0], m2, s2), False))
    for name, pp, qq, eq in cases:
        r = shannon_check(pp, qq, [-30.0], [30.0], cells=400)
        ok = r["passed"] and r["equality"] == eq
        res.rows.append({"case": name, "lhs": r["lhs"], "rhs": r["rhs"], "gap": r["gap"],
                         "equality": r["equality"], "pass": bool(ok)})
    return res


def _mc_mean_width(phi, seed, n_samples):
    r = mean_width(phi, method="monte_carlo", n_samples=n_samples, seed=seed)
    return r.value, r.std_error


def _linearity_triples(rng):
    """Random ``(f, g, lambda)`` with closed-form Asplund products."""
    out = []
    for i in range(20):
        kind = i % 4
        lam = float(rng.uniform(0.3, 3.0))
        n = int(rng.integers(2, 6))
        if kind == 0:
            f, g = _random_quadratic(rng, n), _random_quadratic(rng, n)
        elif kind == 1:
            f = IndicatorBody(Box(-rng.uniform(0.2, 2, n), rng.uniform(0.2, 2, n)), rng.normal())
            g = IndicatorBody(Box(-rng.uniform(0.2, 2, n), rng.uniform(0.2, 2, n)), rng.normal())
        elif kind == 2:
            f = IndicatorBody(Ball(rng.uniform(0.5, 2), rng.normal(size=n)), rng.normal())
            g = IndicatorBody(Ball(rng.uniform(0.5, 2), rng.normal(size=n)), rng.normal())
        else:
            f = RadialPotential(_random_radial_profile(rng), n)
            g = RadialPotential(_random_radial_profile(rng), n)
        out.append((f, g, lam))
    return out


def suite_properties(seed: int = 0, n_samples: int = 100_000) -> SuiteResult:
    """The five basic properties of the mean width, one row each."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("properties", ["property", "checked", "worst", "tolerance", "pass"])
    fam = [f for _, f, _ in urysohn_family(seed)]

    # (i) finiteness from below, with the explicit bound -(2/n) phi(x0)
    worst = np.inf
    for phi in fam:
        n = phi.dim
        x0 = _finite_point(phi)
        bound = -2.0 / n * float(phi(x0[None, :])[0])
        worst = min(worst, mean_width(phi).value - bound)
    res.rows.append({"property": "(i) M*(f) >= -(2/n) phi(x0) > -inf", "checked": len(fam), "worst": worst,
                     "tolerance": -1e-9, "pass": bool(worst >= -1e-9)})

    # (ii) f(x0) >= 1 somewhere implies M* >= 0
    worst = np.inf
    count = 0
    for phi in fam:
        x0 = _finite_point(phi)
        lifted = phi.add_constant(-max(float(phi(x0[None, :])[0]), 0.0))
        worst = min(worst, mean_width(lifted).value)
        count += 1
    res.rows.append({"property": "(ii) f(x0) >= 1 implies M*(f) >= 0", "checked": count, "worst": worst,
                     "tolerance": -1e-9, "pass": bool(worst >= -1e-9)})

    # (iii) linearity, independent Monte Carlo streams, 3 sigma
    worst = 0.0
    for i, (f, g, lam) in enumerate(_linearity_triples(rng)):
        prod = asplund(homothety(lam, f), g)
        a, sa = _mc_mean_width(prod, 3 * i, n_samples)
        b, sb = _mc_mean_width(f, 3 * i + 1, n_samples)
        c, sc = _mc_mean_width(g, 3 * i + 2, n_samples)
        z = abs(a - lam * b - c) / sqrt(sa ** 2 + (lam * sb) ** 2 + sc ** 2)
        worst = max(worst, z)
    res.rows.append({"property": "(iii) M*((lam.f)*g) = lam M*(f) + M*(g)", "checked": 20, "worst": worst,
                     "tolerance": 3.0, "pass": bool(worst <= 3.0)})

    # (iv) rotation and translation invariance, 3 sigma
    worst = 0.0
    cases = 0
    for i in range(10):
        n = int(rng.integers(2, 4))
        U = ortho_group.rvs(n, random_state=rng)
        a = rng.normal(size=n)
        base = _random_quadratic(rng, n) if i % 2 == 0 else IndicatorBody(Box(-rng.uniform(0.2, 2, n), rng.uniform(0.2, 2, n)))
        m0, s0 = _mc_mean_width(base, 100 + 3 * i, n_samples)
        for j, other in enumerate((rotate(base, U), translate(base, a))):
            m1, s1 = _mc_mean_width(other, 101 + 3 * i + j, n_samples)
            worst = max(worst, abs(m1 - m0) / sqrt(s0 ** 2 + s1 ** 2))
            cases += 1
    res.rows.append({"property": "(iv) rotation and translation invariance", "checked": cases, "worst": worst,
                     "tolerance": 3.0, "pass": bool(worst <= 3.0)})

    # (v) scalar law at the support-function level
    worst = 0.0
    for phi in fam:
        a = float(np.exp(rng.normal()))
        X = rng.normal(size=(256, phi.dim))
        d = conjugate(scalar_mult(a, phi))(X) - conjugate(phi)(X) - log(a)
        worst = max(worst, float(np.max(np.abs(d))))
    res.rows.append({"property": "(v) h_{a f} = h_f + log a", "checked": len(fam), "worst": worst,
                     "tolerance": 1e-9, "pass": bool(worst <= 1e-9)})
    return res


def _finite_point(phi):
    if isinstance(phi, GridPotential):
        nodes, vals = phi.finite_nodes()
        return nodes[np.argmin(vals)]
    if isinstance(phi, Quadratic):
        return phi.center.copy()
    if isinstance(phi, IndicatorBody):
        lo, hi = phi.body.bounding_box()
        return 0.5 * (np.asarray(lo) + np.asarray(hi))
    return np.zeros(phi.dim)


def suite_monotone(seed: int = 0) -> SuiteResult:
    """Truncations of a 2-D grid Gaussian increase to the untruncated mean width."""
    spec = GridSpec.from_bounds([-5.0, -5.0], [5.0, 5.0], 41)
    f = sample_on_grid(Quadratic(2), spec)
    target = mean_width(f).value
    res = SuiteResult("monotone", ["k", "m_star", "increment", "pass"])
    prev = -np.inf
    for k in range(1, 9):
        m = mean_width(truncate(f, float(k))).value
        res.rows.append({"k": k, "m_star": m, "increment": m - prev if np.isfinite(prev) else None,
                         "pass": bool(m >= prev - 1e-12)})
        prev = m
    rel = abs(prev - target) / abs(target)
    res.rows.append({"k": "limit", "m_star": target, "increment": rel, "pass": bool(rel <= 0.01)})
    return res


SUITES = {
    "equality": suite_equality,
    "urysohn": suite_urysohn,
    "santalo": suite_santalo,
    "shannon": suite_shannon,
    "properties": suite_properties,
    "monotone": suite_monotone,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite '{name}', expected one of {sorted(SUITES)}")
    return SUITES[name](seed)
