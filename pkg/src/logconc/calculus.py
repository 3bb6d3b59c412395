"""Algebra of log-concave functions, carried out on potentials.

* Asplund product ``(f * g)(x) = sup_{x1 + x2 = x} f(x1) g(x2)``: infimal
  convolution of potentials.
* Homothety ``(lam . f)(x) = f(x / lam)^lam``: ``phi -> lam phi(. / lam)``.
* Pointwise scaling ``a f``: ``phi -> phi - log a``.
* Translation and truncation ``min(f 1_{|x| <= k}, k)``.

Every function accepts either a :class:`LogConcaveFn` or a bare potential
and returns the same kind.
"""
from __future__ import annotations

from math import log

import numpy as np

from .bodies import Ball, Box, Polytope
from .core.analytic import BodyMoreau, IndicatorBody, Quadratic
from .core.base import INF, LogConcaveFn, Potential
from .core.grid import GridPotential, GridSpec, sample_on_grid
from .core.radial import RadialPotential, ball_profile, gaussian_profile
from .legendre import _all_slopes, _conjugate_profile, _sweep_arbitrary

__all__ = [
    "asplund",
    "asplund_direct",
    "homothety",
    "scalar_mult",
    "translate",
    "rotate",
    "truncate",
    "as_radial",
    "TOL_INFCONV_1D",
    "TOL_INFCONV_ND",
]

TOL_INFCONV_1D = 1e-8
TOL_INFCONV_ND = 1e-6
_CHUNK = 4_000_000


def _unwrap(f):
    if isinstance(f, LogConcaveFn):
        return f.phi, True
    if isinstance(f, Potential):
        return f, False
    raise TypeError(f"expected a LogConcaveFn or Potential, got {type(f).__name__}")


def _wrap(phi, wrapped, name=""):
    return LogConcaveFn(phi, name) if wrapped else phi


def as_radial(phi: Potential):
    """Radial form of a rotation-invariant closed-form potential, else ``None``."""
    if isinstance(phi, RadialPotential):
        return phi
    if isinstance(phi, Quadratic) and phi.is_isotropic and not np.any(phi.center):
        return RadialPotential(gaussian_profile(phi.offset, phi.precision[0, 0]), phi.dim, phi.provenance)
    if isinstance(phi, IndicatorBody) and isinstance(phi.body, Ball) and not np.any(phi.body.center):
        return RadialPotential(ball_profile(phi.body.radius, phi.offset), phi.dim, phi.provenance)
    return None


def _bounds(phi):
    if isinstance(phi, GridPotential):
        return np.asarray(phi.spec.origin), np.asarray(phi.spec.upper)
    if isinstance(phi, IndicatorBody):
        return tuple(np.asarray(b) for b in phi.body.bounding_box())
    if isinstance(phi, RadialPotential) and np.isfinite(phi.profile.end):
        r = phi.profile.end
        return np.full(phi.dim, -r), np.full(phi.dim, r)
    return None


def _default_out_grid(p, q):
    bp, bq = _bounds(p), _bounds(q)
    if bp is None or bq is None:
        raise ValueError("an output grid is required when a factor has unbounded support")
    lo, hi = bp[0] + bq[0], bp[1] + bq[1]
    steps = [s.spec.spacing for s in (p, q) if isinstance(s, GridPotential)]
    h = np.min(np.array(steps), axis=0)
    shape = np.maximum(np.rint((hi - lo) / h).astype(int) + 1, 2)
    return GridSpec(tuple(lo), tuple((hi - lo) / (shape - 1)), tuple(shape))


def asplund_direct(p: Potential, q: Potential, out_grid: GridSpec) -> GridPotential:
    """Infimal convolution by brute force over the finite nodes of grid ``p``.

    ``min_y p(y) + q(x - y)`` at every output node, with ``q`` evaluated
    exactly (closed forms) or by interpolation (grids).
    """
    if not isinstance(p, GridPotential):
        p, q = q, p
    if not isinstance(p, GridPotential):
        raise TypeError("asplund_direct needs at least one grid factor")
    Y, pv = p.finite_nodes()
    X = out_grid.nodes()
    out = np.full(len(X), INF)
    step = max(1, _CHUNK // max(len(Y), 1))
    for i in range(0, len(X), step):
        xs = X[i:i + step]
        diff = (xs[:, None, :] - Y[None, :, :]).reshape(-1, p.dim)
        qv = np.asarray(q(diff)).reshape(len(xs), len(Y))
        out[i:i + step] = np.min(qv + pv[None, :], axis=1)
    return GridPotential(out_grid, out.reshape(out_grid.shape), provenance=f"({p.provenance}) [] ({q.provenance})")


def _sum_hull_nodes(p: GridPotential, q: GridPotential):
    from scipy.spatial import ConvexHull, QhullError

    def extreme(P):
        pts = P.finite_nodes()[0]
        if P.dim == 1 or len(pts) <= P.dim:
            return pts
        try:
            return pts[ConvexHull(pts).vertices]
        except QhullError:
            return pts

    a, b = extreme(p), extreme(q)
    return (a[:, None, :] + b[None, :, :]).reshape(-1, p.dim)


def _asplund_grid_conjugate(p: GridPotential, q: GridPotential, out_grid: GridSpec) -> GridPotential:
    from .legendre import _restore_domain

    slope_axes = [np.union1d(_all_slopes(p, ax), _all_slopes(q, ax)) for ax in range(p.dim)]
    Lp = _sweep_arbitrary(p.values, p.spec.axes(), slope_axes)
    Lq = _sweep_arbitrary(q.values, q.spec.axes(), slope_axes)
    back = _sweep_arbitrary(Lp + Lq, slope_axes, out_grid.axes())
    back = _restore_domain(back, out_grid, _sum_hull_nodes(p, q))
    return GridPotential(out_grid, back, provenance=f"({p.provenance}) [] ({q.provenance})")


def asplund(f, g, out_grid: GridSpec | None = None, method: str = "auto"):
    """Asplund product ``f * g``.

    Closed forms are used for Gaussians (any precision), boxes, centred
    balls, a body indicator times ``C exp(-|x - a|^2 / 2)`` and radial profiles (via ``L(L psi_f + L psi_g)``, exact).  Two
    grids are combined in conjugate space on the union of their slope
    sets (exact in 1-D); ``method="direct"`` forces the node-split minimum.
    A grid and a closed-form factor use the node-split minimum.
    """
    p, wrapped = _unwrap(f)
    q, _ = _unwrap(g)
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if method not in ("auto", "conjugate", "direct"):
        raise ValueError(f"unknown method '{method}'")
    res = None
    if method == "auto":
        res = _closed_form_product(p, q)
    if res is None:
        if not (isinstance(p, GridPotential) or isinstance(q, GridPotential)):
            raise NotImplementedError(
                f"no Asplund product rule for {type(p).__name__} and {type(q).__name__}; sample one factor on a grid"
            )
        if out_grid is None:
            out_grid = _default_out_grid(p, q)
        both_grid = isinstance(p, GridPotential) and isinstance(q, GridPotential)
        if both_grid and method in ("auto", "conjugate"):
            res = _asplund_grid_conjugate(p, q, out_grid)
        else:
            res = asplund_direct(p, q, out_grid)
    return _wrap(res, wrapped)


def _closed_form_product(p, q):
    if isinstance(p, Quadratic) and isinstance(q, Quadratic):
        P = np.linalg.inv(np.linalg.inv(p.precision) + np.linalg.inv(q.precision))
        P = 0.5 * (P + P.T)
        return Quadratic(p.dim, p.center + q.center, p.offset + q.offset, P,
                         provenance=f"({p.provenance}) [] ({q.provenance})")
    if isinstance(p, IndicatorBody) and isinstance(q, IndicatorBody):
        K, T = p.body, q.body
        if isinstance(K, Box) and isinstance(T, Box):
            return IndicatorBody(Box(K.lower + T.lower, K.upper + T.upper), p.offset + q.offset)
        if isinstance(K, Ball) and isinstance(T, Ball):
            return IndicatorBody(Ball(K.radius + T.radius, K.center + T.center), p.offset + q.offset)
    rp, rq = as_radial(p), as_radial(q)
    if rp is not None and rq is not None:
        prof = _conjugate_profile(_conjugate_profile(rp.profile) + _conjugate_profile(rq.profile))
        return RadialPotential(prof, p.dim, provenance=f"({p.provenance}) [] ({q.provenance})")
    if isinstance(q, IndicatorBody) and isinstance(p, Quadratic):
        p, q = q, p
    if isinstance(p, IndicatorBody) and isinstance(q, Quadratic) and np.allclose(q.precision, np.eye(p.dim)):
        # inf_y 1_K(y) + |x - y - a|^2 / 2 = dist(x, K + a)^2 / 2
        return BodyMoreau(p.body.translated(q.center), p.offset + q.offset,
                          provenance=f"({p.provenance}) [] ({q.provenance})")
    return None


def homothety(lam: float, f):
    """``(lam . f)(x) = f(x / lam)^lam``."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError("homothety needs lambda > 0")
    p, wrapped = _unwrap(f)
    return _wrap(p.scaled(lam), wrapped)


def scalar_mult(a: float, f):
    """``a f``: the potential shifts by ``-log a``."""
    a = float(a)
    if not a > 0:
        raise ValueError("scalar_mult needs a > 0")
    p, wrapped = _unwrap(f)
    return _wrap(p.add_constant(-log(a)), wrapped)


def translate(f, a):
    """``x -> f(x - a)``.  Grid origins shift exactly, for any ``a``."""
    p, wrapped = _unwrap(f)
    return _wrap(p.translated(a), wrapped)


def rotate(f, U):
    """``x -> f(U x)`` for an orthogonal ``U``.

    Quadratics and body indicators transform exactly (a rotated box becomes
    a polytope); radial potentials are unchanged.
    """
    p, wrapped = _unwrap(f)
    U = np.asarray(U, dtype=float)
    if U.shape != (p.dim, p.dim) or not np.allclose(U.T @ U, np.eye(p.dim), atol=1e-10):
        raise ValueError("rotate needs an orthogonal (dim x dim) matrix")
    if isinstance(p, RadialPotential):
        res = p
    elif isinstance(p, Quadratic):
        res = Quadratic(p.dim, U.T @ p.center, p.offset, U.T @ p.precision @ U, p.provenance)
    elif isinstance(p, IndicatorBody):
        K = p.body
        if isinstance(K, Ball):
            body = Ball(K.radius, U.T @ K.center)
        elif isinstance(K, Box):
            corners = np.array(np.meshgrid(*zip(K.lower, K.upper), indexing="ij")).reshape(p.dim, -1).T
            body = Polytope(corners @ U)
        elif isinstance(K, Polytope):
            body = Polytope(np.asarray(K.vertices) @ U)
        else:
            raise NotImplementedError(f"rotate does not handle {type(K).__name__}")
        res = IndicatorBody(body, p.offset, p.provenance)
    else:
        raise NotImplementedError(f"rotate does not handle {type(p).__name__}")
    return _wrap(res, wrapped)


def truncate(f, k: float, out_grid: GridSpec | None = None):
    """``min(f 1_{|x| <= k}, k)``: compactly supported and bounded.

    Grids are clipped node-wise (nodes with ``|x| > k`` become ``+inf``);
    radial profiles are clipped exactly.  Other closed forms need
    ``out_grid`` and are sampled first.
    """
    k = float(k)
    if not k > 0:
        raise ValueError("truncate needs k > 0")
    p, wrapped = _unwrap(f)
    floor = -log(k)
    rad = as_radial(p)
    if rad is not None:
        prof = rad.profile.clipped_below(floor).restricted(k)
        return _wrap(rad.with_profile(prof, f"trunc[{k:g}]({p.provenance})"), wrapped)
    if not isinstance(p, GridPotential):
        if out_grid is None:
            raise NotImplementedError(f"truncate of {type(p).__name__} needs an out_grid to sample on")
        p = sample_on_grid(p, out_grid)
    nodes = p.spec.nodes()
    far = (np.linalg.norm(nodes, axis=1) > k).reshape(p.spec.shape)
    vals = np.maximum(p.values, floor)
    vals = np.where(far, INF, vals)
    if not np.isfinite(vals).any():
        raise ValueError("truncation leaves no finite node: grid box misses the ball of radius k")
    return _wrap(GridPotential(p.spec, vals, f"trunc[{k:g}]({p.provenance})"), wrapped)
