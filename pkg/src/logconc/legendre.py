"""The Legendre-Fenchel transform ``(L phi)(x) = sup_y (<x, y> - phi(y))``.

Grid potentials are transformed node-exactly: the result at each output
slope is the maximum of ``s * y - psi(y)`` over the finite input nodes.
The 1-D kernel finds the maximizer on the lower convex hull (the argmax
is monotone in the slope) and then scans the run of near-tied nodes
around it, so its output is bit-identical to the quadratic brute force.
Higher-dimensional grids are transformed by nested axis sweeps, which is
exact because a maximum over a product set factorizes.

Closed-form potentials are conjugated symbolically, and radial
piecewise-quadratic profiles are conjugated piece by piece.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .bodies import Ball, Box
from .core.analytic import (
    BodyMoreau,
    BodySupport,
    BodySupportQuadratic,
    BoxProximalSupport,
    IndicatorBody,
    LinearTilt,
    MaxAffine,
    Quadratic,
    Translated,
)
from .core.base import INF, Potential
from .core.grid import GridPotential, GridSpec
from .core.radial import PiecewiseQuadraticProfile, RadialPotential, ball_profile

__all__ = [
    "SupportFn",
    "legendre_1d",
    "legendre_nd",
    "legendre_brute",
    "legendre_radial",
    "conjugate",
    "biconjugate",
    "perturb",
    "h_profile",
    "default_slope_grid",
    "finite_difference_slopes",
]

# A support function is a convex potential in its own right; the same
# carriers serve both roles and ``provenance`` records the source.
SupportFn = Potential

_TIE_RTOL = 1e-13


# --------------------------------------------------------------------------
# 1-D kernel
# --------------------------------------------------------------------------

def _lower_hull(y, v):
    """Indices of the strictly convex lower hull of points sorted by ``y``."""
    hull = []
    for k in range(len(y)):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            if (v[j] - v[i]) * (y[k] - y[i]) >= (v[k] - v[i]) * (y[j] - y[i]):
                hull.pop()
            else:
                break
        hull.append(k)
    return np.asarray(hull, dtype=int)


def _lft_sorted(y, v, s, allow_empty=False):
    """Discrete conjugate ``max_j (s_i * y_j - v_j)`` for sorted nodes ``y``.

    Returns ``(values, argmax)`` where ``argmax`` indexes ``y``.  Infinite
    ``v`` are excluded; if none is finite the result is ``-inf`` (with
    ``allow_empty``) or an error.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)
    finite = np.isfinite(v)
    if not finite.any():
        if allow_empty:
            return np.full(s.shape, -INF), np.full(s.shape, -1)
        raise ValueError("empty effective domain: every node is +inf")
    idx = np.nonzero(finite)[0]
    yf, vf = y[idx], v[idx]
    hull = _lower_hull(yf, vf)
    if len(hull) > 1:
        edge = (vf[hull[1:]] - vf[hull[:-1]]) / (yf[hull[1:]] - yf[hull[:-1]])
        k = np.searchsorted(edge, s, side="left")
    else:
        k = np.zeros(s.shape, dtype=int)
    j = hull[k]
    best = s * yf[j] - vf[j]
    arg = j.copy()
    scale = np.maximum(np.abs(s) * np.abs(yf).max() + np.abs(vf).max(), 1.0)
    tol = _TIE_RTOL * scale
    floor = best - tol
    m = len(yf)
    for step in (-1, 1):
        pos = j.copy()
        active = np.ones(s.shape, dtype=bool)
        while active.any():
            nxt = pos + step
            active &= (nxt >= 0) & (nxt < m)
            if not active.any():
                break
            nn = np.where(active, nxt, 0)
            val = s * yf[nn] - vf[nn]
            active &= val >= floor
            better = active & ((val > best) | ((val == best) & (nn < arg)))
            best = np.where(better, val, best)
            arg = np.where(better, nn, arg)
            pos = np.where(active, nxt, pos)
    return best, idx[arg]


def finite_difference_slopes(phi: GridPotential, axis: int = 0):
    """Finite-difference slopes along ``axis`` between consecutive finite nodes."""
    v = np.moveaxis(phi.values, axis, -1)
    with np.errstate(invalid="ignore"):
        d = np.diff(v, axis=-1) / phi.spec.spacing[axis]
    return d[np.isfinite(d)]


def default_slope_grid(phi: GridPotential, points=None, pad: float = 0.1) -> GridSpec:
    """Slope box spanning the finite-difference slopes per axis, padded by ``pad``.

    Outside that range the discrete conjugate is affine and carries no
    information.  If an axis has no slope spread the range falls back to
    ``[-1, 1]`` around its single slope.
    """
    lo, hi, shape = [], [], []
    for ax in range(phi.dim):
        d = finite_difference_slopes(phi, ax)
        m = phi.spec.shape[ax] if points is None else int(np.atleast_1d(points)[min(ax, np.size(points) - 1)])
        if d.size == 0:
            a, b = -1.0, 1.0
        else:
            a, b = float(d.min()), float(d.max())
            if b - a == 0:
                a, b = a - 1.0, b + 1.0
            else:
                w = b - a
                a, b = a - pad * w, b + pad * w
        lo.append(a)
        hi.append(b)
        shape.append(max(m, 2))
    return GridSpec.from_bounds(lo, hi, shape)


def legendre_1d(psi, out_grid=None):
    """Conjugate of a 1-D grid potential at the slopes of ``out_grid``.

    ``out_grid`` may be a :class:`GridSpec` (returns a grid potential) or
    a sorted array of slopes (returns an array).  Defaults to
    :func:`default_slope_grid`.
    """
    if not isinstance(psi, GridPotential) or psi.dim != 1:
        raise TypeError("legendre_1d needs a 1-D GridPotential")
    y = psi.spec.axes()[0]
    if out_grid is None:
        out_grid = default_slope_grid(psi)
    if isinstance(out_grid, GridSpec):
        s = out_grid.axes()[0]
        vals, _ = _lft_sorted(y, psi.values, s)
        return GridPotential(out_grid, vals, provenance=f"L[{psi.provenance}]")
    s = np.asarray(out_grid, dtype=float)
    order = np.argsort(s, kind="stable")
    vals, _ = _lft_sorted(y, psi.values, s[order])
    out = np.empty_like(vals)
    out[order] = vals
    return out


def legendre_nd(phi: GridPotential, out_grid: GridSpec | None = None, method: str = "sweep") -> GridPotential:
    """Conjugate of a grid potential on the slope grid ``out_grid``.

    ``method="sweep"`` runs one 1-D transform per axis (last axis first),
    negating between sweeps; ``method="brute"`` takes the maximum over all
    input nodes directly.  Both compute the same finite maximum.
    """
    if not isinstance(phi, GridPotential):
        raise TypeError("legendre_nd needs a GridPotential")
    if out_grid is None:
        out_grid = default_slope_grid(phi)
    if out_grid.dim != phi.dim:
        raise ValueError("slope grid dimension differs from the potential")
    if method == "brute":
        return legendre_brute(phi, out_grid)
    if method != "sweep":
        raise ValueError(f"unknown method '{method}'")
    W = np.array(phi.values)
    in_axes = phi.spec.axes()
    out_axes = out_grid.axes()
    first = True
    for ax in reversed(range(phi.dim)):
        src = W if first else -W
        moved = np.moveaxis(src, ax, -1)
        flat = moved.reshape(-1, moved.shape[-1])
        res = np.empty((flat.shape[0], len(out_axes[ax])))
        for r in range(flat.shape[0]):
            res[r], _ = _lft_sorted(in_axes[ax], flat[r], out_axes[ax], allow_empty=True)
        W = np.moveaxis(res.reshape(moved.shape[:-1] + (len(out_axes[ax]),)), -1, ax)
        first = False
    return GridPotential(out_grid, W, provenance=f"L[{phi.provenance}]")


def legendre_brute(phi: GridPotential, out_grid: GridSpec) -> GridPotential:
    """``max`` over all finite nodes of ``<s, y> - phi(y)``, computed directly."""
    nodes, vals = phi.finite_nodes()
    h = MaxAffine(nodes, -vals)
    out = h(out_grid.nodes()).reshape(out_grid.shape)
    return GridPotential(out_grid, out, provenance=f"L[{phi.provenance}] (brute)")


# --------------------------------------------------------------------------
# radial profiles
# --------------------------------------------------------------------------

def legendre_radial(psi, also_return_full: bool = False, dim: int | None = None):
    """Conjugate of a radial profile: ``rho -> sup_{r >= 0} (r rho - psi(r))`` for ``rho >= 0``.

    Accepts a :class:`PiecewiseQuadraticProfile` or a :class:`RadialPotential`.
    With ``also_return_full`` the result is wrapped as a radial potential
    in dimension ``dim`` (taken from the input potential if omitted).
    """
    if isinstance(psi, RadialPotential):
        dim = psi.dim if dim is None else dim
        prof = psi.profile
    elif isinstance(psi, PiecewiseQuadraticProfile):
        prof = psi.flattened()
    else:
        raise TypeError("legendre_radial needs a radial profile or potential")
    out = _conjugate_profile(prof)
    if also_return_full:
        if dim is None:
            raise ValueError("dimension needed for the full radial conjugate")
        return RadialPotential(out, dim, provenance="L[radial]")
    return out


def _conjugate_profile(p: PiecewiseQuadraticProfile) -> PiecewiseQuadraticProfile:
    """Piecewise conjugate of a convex profile on ``[0, R]``, restricted to ``rho >= 0``.

    Smooth pieces with ``a > 0`` map to quadratics on their slope range;
    kinks (including ``r = 0`` and a finite ``R``) map to linear pieces.
    """
    segs = []  # (rho_lo, rho_hi, A, B, C)

    def add(lo, hi, A, B, C):
        if hi > lo:
            segs.append((lo, hi, A, B, C))

    t0 = p.knots[0]
    add(-INF, p.piece_slope(0, t0), 0.0, t0, -p.piece_value(0, t0))
    for i in range(p.n_pieces):
        lo, hi = p.knots[i], p.knots[i + 1]
        s_lo = p.piece_slope(i, lo)
        s_hi = p.piece_slope(i, hi) if np.isfinite(hi) else (INF if p.a[i] > 0 else p.b[i])
        if p.a[i] > 0 and hi > lo:
            a, b, c = p.a[i], p.b[i], p.c[i]
            add(s_lo, s_hi, 1.0 / a, -b / a, 0.5 * b * b / a - c)
        if np.isfinite(hi):
            right = p.piece_slope(i + 1, hi) if i + 1 < p.n_pieces else INF
            add(s_hi, right, 0.0, hi, -p.piece_value(i, hi))
    segs.sort(key=lambda s: s[0])
    segs = [(max(lo, 0.0), hi, A, B, C) for lo, hi, A, B, C in segs if hi > 0]
    if not segs:
        # psi is strictly decreasing on an unbounded domain: conjugate is +inf for rho > 0
        return ball_profile(0.0, -p.argmin()[1])
    knots = [0.0]
    A, B, C = [], [], []
    for lo, hi, a, b, c in segs:
        A.append(a)
        B.append(b)
        C.append(c)
        knots.append(hi)
    return PiecewiseQuadraticProfile(tuple(knots), tuple(A), tuple(B), tuple(C)).simplified()


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def _quadratic_conjugate(q: Quadratic) -> Quadratic:
    A, a, c = q.precision, q.center, q.offset
    Aa = A @ a
    return Quadratic(q.dim, -Aa, -c - 0.5 * a @ Aa, np.linalg.inv(A), provenance=f"L[{q.provenance}]")


def conjugate(phi: Potential, out_grid: GridSpec | None = None) -> Potential:
    """The Legendre transform of ``phi`` in the most exact available carrier.

    Grid potentials become :class:`MaxAffine` (the exact node maximum,
    evaluable anywhere) unless ``out_grid`` asks for a grid result.
    """
    tag = f"L[{getattr(phi, 'provenance', '')}]"
    if isinstance(phi, GridPotential):
        if out_grid is not None:
            return legendre_nd(phi, out_grid)
        nodes, vals = phi.finite_nodes()
        return MaxAffine(nodes, -vals, provenance=tag)
    if isinstance(phi, Quadratic):
        return _quadratic_conjugate(phi)
    if isinstance(phi, IndicatorBody):
        return BodySupport(phi.body, phi.offset, provenance=tag)
    if isinstance(phi, BodySupport):
        return IndicatorBody(phi.body, phi.offset, provenance=tag)
    if isinstance(phi, BodyMoreau):
        return BodySupportQuadratic(phi.body, phi.offset, provenance=tag)
    if isinstance(phi, BodySupportQuadratic):
        return BodyMoreau(phi.body, phi.offset, provenance=tag)
    if isinstance(phi, RadialPotential):
        return RadialPotential(_conjugate_profile(phi.profile), phi.dim, provenance=tag)
    if isinstance(phi, Translated):
        return LinearTilt(conjugate(phi.base), phi.shift, provenance=tag)
    if isinstance(phi, LinearTilt):
        return Translated(conjugate(phi.base), phi.tilt, provenance=tag)
    raise NotImplementedError(f"no conjugate for {type(phi).__name__}")


def _restore_domain(values, spec: GridSpec, finite_nodes):
    """Set ``+inf`` at nodes outside the convex hull of ``finite_nodes``."""
    pts = spec.nodes()
    tol = 1e-9 * max(spec.spacing)
    if spec.dim == 1:
        lo, hi = finite_nodes[:, 0].min(), finite_nodes[:, 0].max()
        out = (pts[:, 0] < lo - tol) | (pts[:, 0] > hi + tol)
    else:
        try:
            hull = ConvexHull(finite_nodes)
            eq = hull.equations
            out = np.any(pts @ eq[:, :-1].T + eq[:, -1] > tol, axis=1)
        except QhullError:
            lo, hi = finite_nodes.min(axis=0), finite_nodes.max(axis=0)
            out = np.any((pts < lo - tol) | (pts > hi + tol), axis=1)
    values = np.array(values).ravel()
    values[out] = INF
    return values.reshape(spec.shape)


def _hull_slopes(phi: GridPotential, ax: int):
    """Edge slopes of the lower convex hull of every line of nodes along ``ax``."""
    y = phi.spec.axes()[ax]
    lines = np.moveaxis(phi.values, ax, -1).reshape(-1, len(y))
    out = []
    for v in lines:
        f = np.isfinite(v)
        if f.sum() < 2:
            continue
        yf, vf = y[f], v[f]
        h = _lower_hull(yf, vf)
        out.append((vf[h[1:]] - vf[h[:-1]]) / (yf[h[1:]] - yf[h[:-1]]))
    return np.concatenate(out) if out else np.array([])


def _all_slopes(phi: GridPotential, ax: int, cap: int = 2049):
    d = np.unique(np.concatenate([finite_difference_slopes(phi, ax), _hull_slopes(phi, ax)]))
    if d.size == 0:
        return np.array([0.0])
    if d.size > cap:
        d = np.linspace(d.min(), d.max(), cap)
    return d


def biconjugate(phi: Potential) -> Potential:
    """``L(L phi)``: the closed convex envelope.

    One-dimensional grids go through the conjugate on all hull and
    finite-difference slopes, which is exact.  Higher-dimensional grids
    use the lower facets of the convex hull of the lifted points
    ``(y, phi(y))``; a flat input, where that hull is degenerate, falls
    back to axis sweeps.  The result is ``+inf`` outside the convex hull
    of the finite nodes.  Nodes where the envelope touches the input
    keep the input value, so the map is idempotent node for node.
    """
    if isinstance(phi, GridPotential):
        nodes, vals = phi.finite_nodes()
        axes = phi.spec.axes()
        if phi.dim == 1:
            s = _all_slopes(phi, 0)
            conj, _ = _lft_sorted(axes[0], phi.values, s)
            back, _ = _lft_sorted(s, conj, axes[0])
        else:
            back = _lifted_hull_envelope(nodes, vals, phi.spec.nodes())
            if back is None:
                slope_axes = [_all_slopes(phi, ax) for ax in range(phi.dim)]
                conj = _sweep_arbitrary(phi.values, axes, slope_axes)
                back = _sweep_arbitrary(conj, slope_axes, axes)
        back = _snap_contact(np.asarray(back).reshape(phi.spec.shape), phi.values)
        back = _restore_domain(back, phi.spec, nodes)
        return GridPotential(phi.spec, back, provenance=f"LL[{phi.provenance}]")
    if isinstance(phi, RadialPotential):
        return RadialPotential(_conjugate_profile(_conjugate_profile(phi.profile)), phi.dim, phi.provenance)
    return conjugate(conjugate(phi))


def _lifted_hull_envelope(nodes, vals, targets, chunk=2_000_000):
    """Lower convex envelope of ``(nodes, vals)`` at ``targets``, or ``None`` if the hull is degenerate."""
    lifted = np.column_stack([nodes, vals])
    try:
        hull = ConvexHull(lifted)
    except QhullError:
        return None
    eq = hull.equations
    lower = eq[eq[:, -2] < -1e-12]
    if len(lower) == 0:
        return None
    # facet a.y + c z + d = 0 with c < 0 gives the plane z = -(a.y + d) / c
    A = -lower[:, :-2] / lower[:, -2:-1]
    d = -lower[:, -1] / lower[:, -2]
    out = np.empty(len(targets))
    step = max(1, chunk // len(lower))
    for i in range(0, len(targets), step):
        out[i:i + step] = np.max(targets[i:i + step] @ A.T + d[None, :], axis=1)
    return out


def _snap_contact(env, values, rtol=1e-12):
    """Keep the input value at nodes where the envelope touches it.

    The envelope never exceeds the input, so a computed value within
    roundoff of the input marks a contact node.  Returning the input there
    makes the biconjugate of a convex grid reproduce it node for node.
    """
    fin = np.isfinite(values)
    tol = rtol * max(1.0, float(np.max(np.abs(values[fin]))))
    return np.where(fin & (env >= values - tol), values, env)


def _sweep_arbitrary(values, in_axes, out_axes):
    """Axis-sweep conjugate between arbitrary sorted coordinate vectors."""
    W = np.array(values, dtype=float)
    first = True
    for ax in reversed(range(W.ndim)):
        src = W if first else -W
        moved = np.moveaxis(src, ax, -1)
        flat = moved.reshape(-1, moved.shape[-1])
        res = np.empty((flat.shape[0], len(out_axes[ax])))
        for r in range(flat.shape[0]):
            res[r], _ = _lft_sorted(in_axes[ax], flat[r], out_axes[ax], allow_empty=True)
        W = np.moveaxis(res.reshape(moved.shape[:-1] + (len(out_axes[ax]),)), -1, ax)
        first = False
    return W


# --------------------------------------------------------------------------
# the perturbed profile H(x, eps)
# --------------------------------------------------------------------------

def perturb(phi: Potential, eps: float) -> Potential:
    """``phi + eps |.|^2 / 2`` in the same carrier where possible."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if isinstance(phi, Quadratic):
        A, a, c = phi.precision, phi.center, phi.offset
        Ae = A + eps * np.eye(phi.dim)
        new_center = np.linalg.solve(Ae, A @ a)
        new_offset = c + 0.5 * a @ A @ a - 0.5 * new_center @ Ae @ new_center
        return Quadratic(phi.dim, new_center, new_offset, Ae, provenance=phi.provenance)
    if isinstance(phi, RadialPotential):
        return phi.with_profile(phi.profile.add_quadratic(eps))
    if isinstance(phi, GridPotential):
        nodes = phi.spec.nodes()
        bump = 0.5 * eps * np.sum(nodes * nodes, axis=1).reshape(phi.spec.shape)
        return phi.with_values(phi.values + bump)
    if isinstance(phi, IndicatorBody) and isinstance(phi.body, Ball) and np.allclose(phi.body.center, 0):
        rad = RadialPotential(ball_profile(phi.body.radius, phi.offset), phi.dim)
        return perturb(rad, eps)
    raise NotImplementedError(f"no perturbation rule for {type(phi).__name__}")


def h_profile(phi: Potential, eps: float, out_grid: GridSpec | None = None) -> Potential:
    """``H(., eps) = L(phi + eps |.|^2 / 2)``, formed explicitly and conjugated."""
    eps = float(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if isinstance(phi, IndicatorBody) and isinstance(phi.body, Box):
        return BoxProximalSupport(phi.body, eps, phi.offset, provenance=f"H[{phi.provenance}]")
    return conjugate(perturb(phi, eps), out_grid)
