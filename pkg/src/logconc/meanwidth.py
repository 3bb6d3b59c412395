"""Mean width of log-concave functions and the inequalities around it.

``M*(f) = (2/n) E h_f(X)`` for a standard Gaussian ``X``, where
``h_f = L(-log f)``.  The differential form ``M~*(f)`` is the derivative
at ``eps = 0`` of ``int G * (eps . f)``, normalised by
``c_n = 2 / (n (2 pi)^(n/2))`` so that ``M~*(G) = 1``; with
``G * (eps . f) = exp(-|x|^2/2 + eps H(x, eps))`` it becomes
``(2/n) lim (E exp(eps H(X, eps)) - 1) / eps``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import log, pi, sqrt

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from ._quad import chi_log_density, chi_window, log_quad_pieces
from ._report import EstimateReport
from .bodies import Ball, Box
from .core.analytic import BoxProximalSupport, IndicatorBody, Quadratic
from .core.base import INF, LogConcaveFn, Potential
from .core.grid import GridPotential
from .core.radial import PiecewiseQuadraticProfile, RadialPotential
from .legendre import conjugate, h_profile

__all__ = [
    "GaussianMeasure",
    "TildeConfig",
    "c_n",
    "chi_expectation",
    "gaussian_expectation",
    "mean_width",
    "mean_width_tilde",
    "check_definition_equality",
    "urysohn_gap",
    "santalo_check",
    "shannon_check",
    "TOL_EQ",
]

TOL_EQ = 1e-4
DEFAULT_ORDERS = {1: 200, 2: 96, 3: 32}
METHODS = ("auto", "quadrature", "monte_carlo", "radial_1d", "closed_form")


def c_n(n: int) -> float:
    """``2 / (n (2 pi)^(n/2))``; ``(2 pi)^(n/2) c_n = 2/n``."""
    return 2.0 / (n * (2 * pi) ** (n / 2))


# checked once at import: the Lebesgue and Gaussian normalisations agree
assert all(abs((2 * pi) ** (k / 2) * c_n(k) - 2 / k) < 1e-12 * (2 / k) for k in (1, 2, 3, 10))


def _potential(f):
    if isinstance(f, LogConcaveFn):
        return f.phi
    if isinstance(f, Potential):
        return f
    raise TypeError(f"expected a LogConcaveFn or Potential, got {type(f).__name__}")


@lru_cache(maxsize=32)
def _gh_rule(dim: int, order: int):
    x, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / sqrt(2 * pi)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class GaussianMeasure:
    """The standard Gaussian probability measure on R^dim."""

    dim: int
    seed: int = 0

    def quadrature(self, order: int | None = None):
        if self.dim > 3:
            raise ValueError("tensor Gauss-Hermite quadrature is limited to dim <= 3")
        return _gh_rule(self.dim, int(order or DEFAULT_ORDERS[self.dim]))

    def sample(self, m: int, seed: int | None = None):
        rng = np.random.default_rng(self.seed if seed is None else seed)
        return rng.standard_normal((m, self.dim))

    def total_mass(self, order: int | None = None) -> float:
        return float(self.quadrature(order)[1].sum())


def _chi_quad(fun, n, breaks=()):
    lo, hi = chi_window(n)
    pts = sorted({float(b) for b in breaks if lo < b < hi})

    def integrand(r):
        return fun(r) * np.exp(chi_log_density(r, n))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        edges = [lo] + pts + [hi]
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(integrand, a, b, limit=400, epsabs=0.0, epsrel=1e-13)
            total += val
    return total


def chi_expectation(profile: PiecewiseQuadraticProfile, n: int):
    """``E psi(|X|)`` for ``X`` standard Gaussian in R^n (``inf`` if the domain is bounded)."""
    if np.isfinite(profile.end):
        return INF
    return float(_chi_quad(lambda r: profile(r), n, profile.knots))


def _witness_report(x, method, n_samples, seed, extra=None):
    diag = {"divergence": "integrand is +inf on a set of positive Gaussian measure", "witness": np.asarray(x).tolist()}
    diag.update(extra or {})
    return EstimateReport(INF, 0.0, method, n_samples, seed, diag)


def gaussian_expectation(g, measure: GaussianMeasure, method: str = "auto", order: int | None = None,
                         n_samples: int = 200_000, seed: int | None = None) -> EstimateReport:
    """``E g(X)`` for ``X ~ measure``.

    ``g`` is a potential or a vectorized callable on ``(m, dim)`` arrays.
    Methods: ``quadrature`` (tensor Gauss-Hermite, dim <= 3),
    ``monte_carlo`` (seeded), ``radial_1d`` (chi-distribution quadrature,
    needs a radial potential) and ``closed_form`` (potentials that know
    their own Gaussian mean).  ``auto`` picks the most exact of these.
    """
    n = measure.dim
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}', expected one of {METHODS}")
    if getattr(g, "dim", n) != n:
        raise ValueError(f"dimension mismatch: integrand has dim {g.dim}, measure has dim {n}")
    if method == "auto":
        if isinstance(g, RadialPotential):
            method = "radial_1d"
        elif _closed_mean(g) is not None:
            method = "closed_form"
        elif n <= 3:
            method = "quadrature"
        else:
            method = "monte_carlo"
    if method == "closed_form":
        val = _closed_mean(g)
        if val is None:
            raise ValueError(f"no closed-form Gaussian mean for {type(g).__name__}")
        if np.isinf(val):
            return _witness_report([float("inf")] * n, method, 0, None)
        return EstimateReport(float(val), 0.0, method, 0, None, {"rule": "exact"})
    if method == "radial_1d":
        if not isinstance(g, RadialPotential):
            raise ValueError("radial_1d needs a RadialPotential integrand")
        prof = g.profile
        if np.isfinite(prof.end):
            r = prof.end + 1.0
            w = np.zeros(n)
            w[0] = r
            return _witness_report(w, method, 0, None, {"support_radius": prof.end})
        return EstimateReport(chi_expectation(prof, n), 0.0, method, 0, None, {"rule": "chi-density adaptive quadrature"})
    if method == "quadrature":
        nodes, weights = measure.quadrature(order)
        vals = np.asarray(g(nodes), dtype=float)
        bad = np.isinf(vals) & (weights > 0)
        if bad.any():
            return _witness_report(nodes[np.argmax(bad)], method, len(nodes), None)
        est = float(weights @ vals)
        diag = {"order": int(order or DEFAULT_ORDERS[n])}
        return EstimateReport(est, 0.0, method, len(nodes), None, diag)
    seed = measure.seed if seed is None else seed
    X = measure.sample(n_samples, seed)
    vals = np.asarray(g(X), dtype=float)
    if np.isinf(vals).any():
        return _witness_report(X[np.argmax(np.isinf(vals))], method, n_samples, seed)
    return EstimateReport(float(vals.mean()), float(vals.std(ddof=1) / sqrt(n_samples)), method, n_samples, seed)


def _closed_mean(g):
    fn = getattr(g, "gaussian_mean", None)
    if fn is None or isinstance(g, RadialPotential):
        return None
    try:
        return fn()
    except (NotImplementedError, ValueError):
        return None


def mean_width(f, method: str = "auto", order: int | None = None, n_samples: int = 200_000,
               seed: int = 0) -> EstimateReport:
    """``M*(f) = (2/n) E h_f(X)``; ``+inf`` (with a witness) when ``h_f`` is infinite somewhere."""
    phi = _potential(f)
    n = phi.dim
    h = conjugate(phi)
    est = gaussian_expectation(h, GaussianMeasure(n, seed), method, order, n_samples, seed)
    diag = dict(est.diagnostics)
    diag["support_function"] = getattr(h, "provenance", type(h).__name__)
    value = INF if est.is_infinite else 2.0 / n * est.value
    return EstimateReport(value, 2.0 / n * est.std_error, est.method, est.n_samples, est.seed, diag)


@dataclass(frozen=True)
class TildeConfig:
    """Finite-difference schedule for the differential mean width."""

    eps_schedule: tuple = tuple(2.0 ** -j for j in range(3, 13))
    extrapolation: str = "affine"
    tail: int = 4
    divergence_ratio: float = 1.05
    method: str = "auto"
    order: int | None = None
    n_samples: int = 200_000
    seed: int = 0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_schedule)
        if len(eps) < 2 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps[:-1], eps[1:])):
            raise ValueError("eps_schedule must be strictly decreasing and positive")
        if self.extrapolation not in ("none", "affine"):
            raise ValueError("extrapolation must be 'none' or 'affine'")
        if self.tail < 2 or self.tail > len(eps):
            raise ValueError("tail must be between 2 and the schedule length")
        object.__setattr__(self, "eps_schedule", eps)


def _log_exp_moment_radial(H: RadialPotential, eps: float):
    """``log E exp(eps H(|X|))`` by log-space quadrature over the radius."""
    n = H.dim
    prof = H.profile
    end = prof.end

    def logf(r):
        return eps * prof(r) + chi_log_density(r, n)

    breaks = [0.0] + [t for t in prof.knots[1:-1]] + [end]
    return log_quad_pieces(logf, breaks, scale=max(1.0, sqrt(n)))


def _log_exp_moment_box(H: BoxProximalSupport, eps: float):
    """The box case separates: a product of 1-D integrals with kinks at ``eps l_i``, ``eps u_i``."""
    total = -eps * H.offset
    for lo, hi in zip(H.box.lower, H.box.upper):
        def fun(t, lo=lo, hi=hi):
            z = min(max(t / eps, lo), hi)
            return np.exp(eps * (t * z - 0.5 * eps * z * z) - 0.5 * t * t) / sqrt(2 * pi)
        edges = [-40.0, eps * lo, eps * hi, 40.0]
        acc = sum(integrate.quad(fun, a, b, epsabs=0.0, epsrel=1e-13, limit=200)[0]
                  for a, b in zip(edges[:-1], edges[1:]))
        total += log(acc)
    return total


def _exp_moment(H, eps, measure, cfg):
    """``(log E exp(eps H), E expm1(eps H), method, n_points)``."""
    n = measure.dim
    if isinstance(H, RadialPotential):
        lr = _log_exp_moment_radial(H, eps)
        return lr, float(np.expm1(lr)), "radial_1d", 0
    if isinstance(H, BoxProximalSupport):
        lr = _log_exp_moment_box(H, eps)
        return lr, float(np.expm1(lr)), "quadrature", 0
    if n <= 3 and cfg.method in ("auto", "quadrature"):
        nodes, weights = measure.quadrature(cfg.order)
        vals = eps * np.asarray(H(nodes), dtype=float)
        pts = len(nodes)
        used = "quadrature"
    else:
        nodes = measure.sample(cfg.n_samples, cfg.seed)
        weights = np.full(len(nodes), 1.0 / len(nodes))
        vals = eps * np.asarray(H(nodes), dtype=float)
        pts = len(nodes)
        used = "monte_carlo"
    if np.isinf(vals).any():
        return INF, INF, used, pts
    with np.errstate(over="ignore"):
        lr = float(logsumexp(vals, b=weights))
        em1 = float(weights @ np.expm1(vals))
    return lr, em1, used, pts


def mean_width_tilde(f, cfg: TildeConfig | None = None) -> EstimateReport:
    """Differential mean width by secant slopes along ``cfg.eps_schedule``.

    The slopes ``(2/n) (I(eps)/int G - 1)/eps`` are extrapolated to
    ``eps = 0`` by an affine fit through the last ``cfg.tail`` of them.
    If ``I(eps)/int G`` stays above ``cfg.divergence_ratio`` without
    decreasing along that tail, the limit does not exist and the value is
    ``+inf``.
    """
    cfg = cfg or TildeConfig()
    phi = _potential(f)
    n = phi.dim
    measure = GaussianMeasure(n, cfg.seed)
    table = []
    slopes = []
    used = None
    pts = 0
    for eps in cfg.eps_schedule:
        H = h_profile(phi, eps)
        lr, em1, used, pts = _exp_moment(H, eps, measure, cfg)
        ratio = float(np.exp(lr)) if lr < 700 else INF
        slope = 2.0 / n * em1 / eps
        table.append({"eps": eps, "log_I_over_int_G": lr, "I_over_int_G": ratio, "slope": slope})
        slopes.append(slope)
    eps_arr = np.array(cfg.eps_schedule)
    ratios = np.array([row["I_over_int_G"] for row in table])
    k = cfg.tail
    tail_r = ratios[-k:]
    diverging = bool(
        np.isinf(tail_r).any()
        or (tail_r[-1] > cfg.divergence_ratio and np.all(np.diff(tail_r) <= 1e-12 * np.abs(tail_r[:-1])))
    )
    diffs = np.diff(np.array(slopes))
    if np.all(diffs <= 1e-12 * (1 + np.abs(slopes[:-1]))):
        trend = "nonincreasing as eps decreases"
    elif np.all(diffs >= -1e-12 * (1 + np.abs(slopes[:-1]))):
        trend = "nondecreasing as eps decreases"
    else:
        trend = "mixed"
    diag = {"table": table, "c_n": c_n(n), "slope_trend": trend, "monotone_slopes": trend != "mixed"}
    if diverging:
        diag["divergence"] = "I(eps) stays above int G as eps -> 0; the limit defining the derivative is infinite"
        diag["witness"] = {"eps": float(eps_arr[-1]), "I_over_int_G": float(tail_r[-1])}
        return EstimateReport(INF, 0.0, "finite_difference", pts, cfg.seed, diag)
    s = np.array(slopes[-k:])
    e = eps_arr[-k:]
    if cfg.extrapolation == "affine":
        A = np.stack([np.ones_like(e), e], axis=1)
        coef, *_ = np.linalg.lstsq(A, s, rcond=None)
        value = float(coef[0])
        resid = s - A @ coef
        err = float(np.sqrt(np.sum(resid ** 2) / max(k - 2, 1)))
    else:
        value = float(s[-1])
        err = float(abs(s[-1] - s[-2]))
    diag["integration"] = used
    return EstimateReport(value, err, "finite_difference", pts, cfg.seed, diag)


def check_definition_equality(f, cfg: TildeConfig | None = None, method: str = "auto", tol: float = 0.02) -> dict:
    """Compare ``M*`` and ``M~*``; both infinite counts as agreement."""
    ms = mean_width(f, method=method)
    mt = mean_width_tilde(f, cfg)
    both_inf = ms.is_infinite and mt.is_infinite
    if both_inf:
        gap = 0.0
    elif ms.is_infinite or mt.is_infinite:
        gap = INF
    else:
        gap = abs(mt.value - ms.value) / max(abs(ms.value), 1e-300)
    return {
        "m_star": ms.value,
        "m_tilde": mt.value,
        "rel_gap": gap,
        "both_infinite": both_inf,
        "passed": bool(gap <= tol),
        "m_star_report": ms,
        "m_tilde_report": mt,
    }


def urysohn_gap(f, method: str = "auto", tol_eq: float = TOL_EQ) -> dict:
    """``M*(f) - (2/n) log(int f / int G) - 1``, nonnegative by the functional Urysohn inequality."""
    phi = _potential(f)
    n = phi.dim
    log_int = phi.log_integral()
    if log_int == -INF:
        raise ValueError("int f = 0: the inequality is vacuous")
    log_int_g = 0.5 * n * log(2 * pi)
    ms = mean_width(phi, method=method)
    rhs = 2.0 / n * (log_int - log_int_g) + 1.0
    gap = ms.value - rhs
    return {
        "gap": gap,
        "m_star": ms.value,
        "rhs": rhs,
        "log_int_f": log_int,
        "log_int_G": log_int_g,
        "equality": bool(abs(gap) <= tol_eq),
        "method": ms.method,
    }


# --------------------------------------------------------------------------
# Santalo
# --------------------------------------------------------------------------

def _log_int_exp_linear(c, lo, hi):
    """log of int_lo^hi exp(c y) dy; may be +inf."""
    if c == 0:
        return log(hi - lo) if np.isfinite(hi - lo) else INF
    if c > 0:
        if not np.isfinite(hi):
            return INF
        return c * hi + np.log(-np.expm1(c * (lo - hi))) - log(c) if np.isfinite(lo) else c * hi - log(c)
    if not np.isfinite(lo):
        return c * lo if np.isfinite(lo) else (c * hi - log(-c) if np.isfinite(hi) else INF)
    if not np.isfinite(hi):
        return c * lo - log(-c)
    return c * lo + np.log(-np.expm1(c * (hi - lo))) - log(-c)


class _ConjugateIntegral:
    """``x0 -> log int exp(-(L phi)(y) + <y, x0>) dy`` for a grid potential."""

    def __init__(self, phi: GridPotential, points_per_axis: int = 401, reach: float = 40.0):
        self.phi = phi
        self.h = conjugate(phi)
        nodes, _ = phi.finite_nodes()
        self.lo, self.hi = nodes.min(axis=0), nodes.max(axis=0)
        if phi.dim == 1:
            self.breaks, self.s, self.b = self.h.pieces_1d()
        else:
            width = np.min(self.hi - self.lo)
            R = reach / max(0.5 * width, min(phi.spec.spacing))
            axes = [np.linspace(-R, R, points_per_axis)] * phi.dim
            mesh = np.meshgrid(*axes, indexing="ij")
            self.y = np.stack([m.ravel() for m in mesh], axis=1)
            self.log_cell = phi.dim * log(axes[0][1] - axes[0][0])
            self.neg_h = -self.h(self.y)

    def __call__(self, x0):
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        if np.any(x0 <= self.lo) or np.any(x0 >= self.hi):
            return INF
        if self.phi.dim == 1:
            parts = [
                -b + _log_int_exp_linear(float(x0[0] - s), lo, hi)
                for lo, hi, s, b in zip(self.breaks[:-1], self.breaks[1:], self.s, self.b)
            ]
            return float(logsumexp(parts))
        return float(logsumexp(self.neg_h + self.y @ x0) + self.log_cell)

    def grad(self, x0):
        """Barycentre of ``exp(-(L phi~))`` (grid rule, any dim)."""
        if self.phi.dim == 1:
            e = 1e-6
            return np.array([(self(x0 + e) - self(x0 - e)) / (2 * e)])
        w = self.neg_h + self.y @ x0
        w = np.exp(w - w.max())
        return (w @ self.y) / w.sum()


def santalo_check(phi, tol: float = 1e-3) -> dict:
    """Minimise ``int exp(-L phi~)`` over translates ``phi~(x) = phi(x + x0)``.

    Reports the optimal ``x0`` (the point moved to the origin), the
    product ``int e^-phi~ int e^-L phi~`` and the comparison with
    ``(2 pi)^n``.
    """
    phi = _potential(phi)
    n = phi.dim
    log_bound = n * log(2 * pi)
    log_int = phi.log_integral()
    if not np.isfinite(log_int):
        raise ValueError("santalo_check needs 0 < int exp(-phi) < inf")
    method = "closed_form"
    if isinstance(phi, Quadratic):
        x0 = phi.center.copy()
    elif isinstance(phi, IndicatorBody) and isinstance(phi.body, Box):
        x0 = 0.5 * (phi.body.lower + phi.body.upper)
    elif isinstance(phi, IndicatorBody) and isinstance(phi.body, Ball):
        x0 = phi.body.center.copy()
    elif isinstance(phi, RadialPotential):
        x0 = np.zeros(n)
    elif isinstance(phi, GridPotential):
        return _santalo_grid(phi, log_int, log_bound, tol)
    else:
        raise NotImplementedError(f"santalo_check does not handle {type(phi).__name__}")
    shifted = phi.translated(-x0) if np.any(x0) else phi
    log_conj = conjugate(shifted).log_integral()
    return _santalo_report(x0, log_int, log_conj, log_bound, tol, method)


def _santalo_report(x0, log_int, log_conj, log_bound, tol, method, extra=None):
    log_prod = log_int + log_conj
    out = {
        "x0": np.asarray(x0, dtype=float).tolist(),
        "log_int_phi": log_int,
        "log_int_conjugate": log_conj,
        "product": float(np.exp(log_prod)) if log_prod < 700 else INF,
        "bound": float(np.exp(log_bound)),
        "ratio": float(np.exp(log_prod - log_bound)) if log_prod < 700 else INF,
        "vacuous": bool(not np.isfinite(log_conj)),
        "passed": bool(not np.isfinite(log_conj) or log_prod <= log_bound + np.log1p(tol)),
        "method": method,
    }
    out.update(extra or {})
    return out


def _santalo_grid(phi: GridPotential, log_int, log_bound, tol):
    J = _ConjugateIntegral(phi)
    axes = phi.spec.axes()
    # coordinate descent over interior node offsets
    idx = [len(a) // 2 for a in axes]
    best = J(np.array([a[i] for a, i in zip(axes, idx)]))
    for _ in range(100):
        moved = False
        for ax, a in enumerate(axes):
            for cand in range(1, len(a) - 1):
                trial = list(idx)
                trial[ax] = cand
                val = J(np.array([ax_[i] for ax_, i in zip(axes, trial)]))
                if val < best - 1e-14:
                    best, idx, moved = val, trial, True
        if not moved:
            break
    x_node = np.array([a[i] for a, i in zip(axes, idx)])
    res = optimize.minimize(lambda x: J(x), x_node, method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
    x0 = res.x if res.fun <= best else x_node
    log_conj = min(best, float(res.fun))
    return _santalo_report(x0, log_int, log_conj, log_bound, tol, "grid",
                           {"node_x0": x_node.tolist(), "grid_spacing": list(phi.spec.spacing)})


# --------------------------------------------------------------------------
# Shannon
# --------------------------------------------------------------------------

def _box_rule(lower, upper, cells, order):
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    x, w = np.polynomial.legendre.leggauss(order)
    pts_axes, w_axes = [], []
    for lo, hi in zip(lower, upper):
        edges = np.linspace(lo, hi, cells + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        pts_axes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        w_axes.append((half[:, None] * w[None, :]).ravel())
    mesh = np.meshgrid(*pts_axes, indexing="ij")
    wmesh = np.meshgrid(*w_axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    wts = np.prod(np.stack([m.ravel() for m in wmesh], axis=1), axis=1)
    return pts, wts


def shannon_check(p, q, lower, upper, cells: int = 200, order: int = 8, tol: float = 1e-8,
                  tol_eq: float = 1e-8) -> dict:
    """``int p log(1/p) <= int p log(1/q) + log int q`` on the box ``[lower, upper]``.

    ``p`` must be a probability density (checked on the box) and ``q``
    nonnegative; both are vectorized callables on ``(m, dim)`` arrays.
    """
    pts, wts = _box_rule(lower, upper, cells, order)
    pv = np.asarray(p(pts), dtype=float)
    qv = np.asarray(q(pts), dtype=float)
    if np.any(pv < 0) or np.any(qv < 0):
        raise ValueError("p and q must be nonnegative")
    mass = float(wts @ pv)
    if abs(mass - 1) > 1e-6:
        raise ValueError(f"p does not integrate to 1 on the box (got {mass:.8f})")
    int_q = float(wts @ qv)
    if int_q <= 0:
        raise ValueError("int q = 0")
    pos = pv > 0
    with np.errstate(divide="ignore"):
        lhs = float(wts[pos] @ (-pv[pos] * np.log(pv[pos])))
        log_q = np.log(qv[pos])
    if np.any(np.isinf(log_q)):
        rhs = INF
    else:
        rhs = float(wts[pos] @ (-pv[pos] * log_q)) + log(int_q)
    gap = rhs - lhs
    return {"lhs": lhs, "rhs": rhs, "gap": gap, "int_p": mass, "int_q": int_q,
            "passed": bool(gap >= -tol), "equality": bool(abs(gap) <= tol_eq)}
