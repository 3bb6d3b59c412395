"""Convex bodies, their support functions, and classical mean width.

Bodies are small immutable objects with an exact support function and an
exact Euclidean distance, which is all the Monte Carlo volume estimators
below need: ``x`` lies in ``K + tD`` iff ``dist(x, K) <= t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, gamma, lgamma, pi, sqrt

import numpy as np
from scipy.spatial import ConvexHull

from ._report import EstimateReport

__all__ = [
    "ConvexBody",
    "Ball",
    "Box",
    "Polytope",
    "Segment",
    "QuermassReport",
    "unit_ball_volume",
    "sphere_abs_coordinate_mean",
    "support_body",
    "mean_width_body",
    "mean_width_body_limit",
    "mc_volume",
    "steiner_fit",
    "urysohn_body_gap",
]

_MEMBER_TOL = 1e-12


def unit_ball_volume(n: int) -> float:
    """Volume of the Euclidean unit ball in dimension ``n``."""
    return pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_abs_coordinate_mean(n: int) -> float:
    """E|theta_1| for theta uniform on the unit sphere of R^n."""
    if n == 1:
        return 1.0
    return float(np.exp(lgamma(n / 2) - lgamma((n + 1) / 2)) / sqrt(pi))


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise ValueError(f"points have dimension {x.shape[-1]}, body has {dim}")
    return x


class ConvexBody:
    """Base class: nonempty compact convex set with exact support function."""

    dim: int

    def support(self, x):
        raise NotImplementedError

    def distance(self, x):
        raise NotImplementedError

    def contains(self, x, tol=_MEMBER_TOL):
        return self.distance(x) <= tol * (1.0 + self.diameter())

    def bounding_box(self):
        raise NotImplementedError

    def volume(self) -> float:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def translated(self, a) -> "ConvexBody":
        raise NotImplementedError

    def scaled(self, lam: float) -> "ConvexBody":
        raise NotImplementedError

    def exact_mean_width(self):
        """Closed-form spherical mean width, or None when there is none."""
        return None


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    radius: float
    center: np.ndarray

    def __init__(self, radius, center=None, dim=None):
        if center is None:
            if dim is None:
                raise ValueError("Ball needs a center or a dim")
            center = np.zeros(dim)
        center = np.asarray(center, dtype=float).reshape(-1)
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "center", center)

    @property
    def dim(self):
        return self.center.size

    def support(self, x):
        x = _as_points(x, self.dim)
        return self.radius * np.linalg.norm(x, axis=-1) + x @ self.center

    def distance(self, x):
        x = _as_points(x, self.dim)
        return np.maximum(np.linalg.norm(x - self.center, axis=-1) - self.radius, 0.0)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def volume(self):
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def diameter(self):
        return 2 * self.radius

    def translated(self, a):
        return Ball(self.radius, self.center + np.asarray(a, dtype=float))

    def scaled(self, lam):
        return Ball(lam * self.radius, lam * self.center)

    def exact_mean_width(self):
        # the linear term integrates to zero over the sphere
        return self.radius


@dataclass(frozen=True, eq=False)
class Box(ConvexBody):
    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape or np.any(upper < lower):
            raise ValueError("Box needs lower <= upper with matching shapes")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return self.lower.size

    def support(self, x):
        x = _as_points(x, self.dim)
        return np.maximum(x * self.lower, x * self.upper).sum(axis=-1)

    def distance(self, x):
        x = _as_points(x, self.dim)
        return np.linalg.norm(np.clip(x, self.lower, self.upper) - x, axis=-1)

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def volume(self):
        return float(np.prod(self.upper - self.lower))

    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def translated(self, a):
        a = np.asarray(a, dtype=float)
        return Box(self.lower + a, self.upper + a)

    def scaled(self, lam):
        return Box(lam * self.lower, lam * self.upper)

    def exact_mean_width(self):
        half = 0.5 * (self.upper - self.lower)
        return float(half.sum() * sphere_abs_coordinate_mean(self.dim))


@dataclass(frozen=True, eq=False)
class Segment(ConvexBody):
    start: np.ndarray
    end: np.ndarray

    def __init__(self, start, end):
        start = np.asarray(start, dtype=float).reshape(-1)
        end = np.asarray(end, dtype=float).reshape(-1)
        if start.shape != end.shape:
            raise ValueError("segment endpoints differ in dimension")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    @property
    def dim(self):
        return self.start.size

    def support(self, x):
        x = _as_points(x, self.dim)
        return np.maximum(x @ self.start, x @ self.end)

    def distance(self, x):
        x = _as_points(x, self.dim)
        d = self.end - self.start
        dd = float(d @ d)
        if dd == 0.0:
            return np.linalg.norm(x - self.start, axis=-1)
        t = np.clip((x - self.start) @ d / dd, 0.0, 1.0)
        proj = self.start + t[..., None] * d
        return np.linalg.norm(x - proj, axis=-1)

    def bounding_box(self):
        return np.minimum(self.start, self.end), np.maximum(self.start, self.end)

    def volume(self):
        return 0.0 if self.dim > 1 else float(abs(self.end - self.start)[0])

    def diameter(self):
        return float(np.linalg.norm(self.end - self.start))

    def translated(self, a):
        a = np.asarray(a, dtype=float)
        return Segment(self.start + a, self.end + a)

    def scaled(self, lam):
        return Segment(lam * self.start, lam * self.end)

    def exact_mean_width(self):
        # h(theta) = <theta, s> + max(0, <theta, d>); only the second term survives
        length = self.diameter()
        return 0.5 * length * sphere_abs_coordinate_mean(self.dim)


@dataclass(frozen=True, eq=False)
class Polytope(ConvexBody):
    """Convex hull of a finite vertex list (n = 2 or 3 for distances)."""

    vertices: np.ndarray
    _hull: object = field(repr=False, default=None)

    def __init__(self, vertices):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.shape[0] == 0:
            raise ValueError("empty body")
        object.__setattr__(self, "vertices", v)
        hull = None
        if v.shape[1] in (2, 3) and v.shape[0] > v.shape[1]:
            try:
                hull = ConvexHull(v)
            except Exception:  # degenerate (flat) vertex sets
                hull = None
        object.__setattr__(self, "_hull", hull)

    @property
    def dim(self):
        return self.vertices.shape[1]

    def support(self, x):
        x = _as_points(x, self.dim)
        return (x @ self.vertices.T).max(axis=-1)

    def distance(self, x):
        x = _as_points(x, self.dim)
        if self._hull is None:
            if self.vertices.shape[0] == 1:
                return np.linalg.norm(x - self.vertices[0], axis=-1)
            if self.vertices.shape[0] == 2:
                return Segment(self.vertices[0], self.vertices[1]).distance(x)
            raise NotImplementedError("distance needs a full-dimensional 2-D/3-D polytope")
        eq = self._hull.equations
        inside = np.all(x @ eq[:, :-1].T + eq[:, -1] <= 0, axis=-1)
        if self.dim == 2:
            d = np.full(x.shape[:-1], np.inf)
            for i, j in self._hull.simplices:
                d = np.minimum(d, Segment(self.vertices[i], self.vertices[j]).distance(x))
        else:
            d = np.full(x.shape[:-1], np.inf)
            for tri in self._hull.simplices:
                d = np.minimum(d, _point_triangle_distance(x, *self.vertices[tri]))
        return np.where(inside, 0.0, d)

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def volume(self):
        if self._hull is None:
            return 0.0
        return float(self._hull.volume)

    def diameter(self):
        v = self.vertices
        return float(np.sqrt(((v[:, None, :] - v[None, :, :]) ** 2).sum(-1)).max())

    def translated(self, a):
        return Polytope(self.vertices + np.asarray(a, dtype=float))

    def scaled(self, lam):
        return Polytope(lam * self.vertices)


def _point_triangle_distance(p, a, b, c):
    """Vectorised distance from points ``p`` (m, 3) to triangle abc."""
    ab, ac = b - a, c - a
    normal = np.cross(ab, ac)
    nn = normal @ normal
    # barycentric coordinates of the projection onto the plane
    ap = p - a
    d00, d01, d11 = ab @ ab, ab @ ac, ac @ ac
    d20, d21 = ap @ ab, ap @ ac
    denom = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    u = 1.0 - v - w
    inside = (u >= 0) & (v >= 0) & (w >= 0)
    plane = np.abs(ap @ normal) / np.sqrt(nn)
    edges = np.minimum.reduce([
        Segment(a, b).distance(p), Segment(b, c).distance(p), Segment(a, c).distance(p)
    ])
    return np.where(inside, plane, edges)


def support_body(K: ConvexBody, x):
    """h_K(x) = sup over y in K of <x, y>."""
    return K.support(x)


def _sphere_samples(n, m, rng):
    g = rng.standard_normal((m, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def mean_width_body(K: ConvexBody, method="auto", n_samples=200_000, seed=0) -> EstimateReport:
    """Spherical mean width M*(K), the average of h_K over the unit sphere.

    ``method="auto"`` uses the closed form when the body has one and
    Monte Carlo over normalised Gaussian directions otherwise.
    """
    exact = K.exact_mean_width()
    if method == "auto" and exact is not None:
        return EstimateReport(exact, 0.0, "closed_form", diagnostics={"body": type(K).__name__})
    if method not in ("auto", "monte_carlo"):
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    h = K.support(_sphere_samples(K.dim, n_samples, rng))
    return EstimateReport(
        float(h.mean()), float(h.std(ddof=1) / sqrt(n_samples)), "monte_carlo",
        n_samples=n_samples, seed=seed, diagnostics={"body": type(K).__name__},
    )


def mc_volume(K: ConvexBody, t=0.0, n_samples=1_000_000, seed=0):
    """Monte Carlo volume of ``K + tD`` by rejection from a bounding box.

    Returns ``(volume, standard_error)``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = K.bounding_box()
    lo, hi = lo - t, hi + t
    box = float(np.prod(hi - lo))
    if box == 0.0:
        return 0.0, 0.0
    hits = 0
    done = 0
    chunk = 250_000
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = lo + (hi - lo) * rng.random((m, K.dim))
        hits += int(np.count_nonzero(K.distance(x) <= t))
        done += m
    p = hits / n_samples
    return box * p, box * sqrt(max(p * (1 - p), 0.0) / n_samples)


def mean_width_body_limit(
    K: ConvexBody,
    eps_schedule=(0.4, 0.3, 0.2, 0.1, 0.05),
    n_samples=1_000_000,
    seed=0,
) -> EstimateReport:
    """Mean width from the volume growth of ``D + eps K``.

    All schedule points reuse one sample cloud, and each volume increment
    ``|D + eps K| - |D|`` is estimated from the symmetric difference of the
    two indicator counts.  The secants are polynomials of degree n - 1 in
    eps, so a least-squares polynomial fit extrapolates them to eps = 0.
    """
    n = K.dim
    if n not in (2, 3):
        raise ValueError("limit path is implemented for n in {2, 3}")
    eps = np.sort(np.asarray(eps_schedule, dtype=float))[::-1]
    if np.any(eps <= 0):
        raise ValueError("eps schedule must be positive")
    rng = np.random.default_rng(seed)
    klo, khi = K.bounding_box()
    lo = np.minimum(-1.0, -1.0 + eps[0] * klo)
    hi = np.maximum(1.0, 1.0 + eps[0] * khi)
    box = float(np.prod(hi - lo))
    diffs = np.zeros((eps.size, 2))  # running sum and sum of squares
    done = 0
    chunk = 200_000
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = lo + (hi - lo) * rng.random((m, n))
        in_d = np.linalg.norm(x, axis=1) <= 1.0
        for i, e in enumerate(eps):
            in_sum = K.scaled(e).distance(x) <= 1.0
            z = in_sum.astype(float) - in_d
            diffs[i, 0] += z.sum()
            diffs[i, 1] += (z * z).sum()
        done += m
    mean = diffs[:, 0] / n_samples
    var = diffs[:, 1] / n_samples - mean ** 2
    secant = box * mean / eps
    secant_err = box * np.sqrt(np.maximum(var, 0) / n_samples) / eps
    deg = n - 1
    A = np.vander(eps, deg + 1, increasing=True)
    # a zero error (degenerate body) would overflow the weights
    floor = 1e-12 * max(float(np.max(np.abs(secant))), 1.0)
    W = 1.0 / np.maximum(secant_err, floor)
    coef, *_ = np.linalg.lstsq(A * W[:, None], secant * W, rcond=None)
    cov = np.linalg.pinv((A * W[:, None]).T @ (A * W[:, None]))
    scale = n * unit_ball_volume(n)
    return EstimateReport(
        float(coef[0] / scale), float(sqrt(max(cov[0, 0], 0.0)) / scale), "monte_carlo",
        n_samples=n_samples, seed=seed,
        diagnostics={"eps": eps.tolist(), "secants": secant.tolist(), "secant_errors": secant_err.tolist()},
    )


@dataclass
class QuermassReport:
    """Steiner polynomial fit ``|K + tD| = sum_i C(n, i) V_{n-i} t^i``."""

    quermass: np.ndarray  # V_0 .. V_n
    residual: float
    radii: np.ndarray
    volumes: np.ndarray
    volume_errors: np.ndarray
    v1_over_mean_width: float
    volume_check: float

    @property
    def dim(self):
        return self.quermass.size - 1

    def to_dict(self):
        return {
            "quermass": self.quermass.tolist(),
            "residual": self.residual,
            "radii": self.radii.tolist(),
            "volumes": self.volumes.tolist(),
            "volume_errors": self.volume_errors.tolist(),
            "v1_over_mean_width": self.v1_over_mean_width,
            "volume_check": self.volume_check,
        }


def steiner_fit(K: ConvexBody, radii=None, n_samples=1_000_000, seed=0) -> QuermassReport:
    """Fit the Steiner polynomial of ``K`` from Monte Carlo volumes.

    The default radii are 8 geometric points in ``[0.1, 1.0] * diam(K)``.
    ``v1_over_mean_width`` is ``V_1 / (|D| M*(K))`` and ``volume_check`` is
    ``V_n - |K|``; both come back in the report for the caller to judge.
    """
    n = K.dim
    if n not in (2, 3):
        raise ValueError("steiner_fit is implemented for n in {2, 3}")
    if radii is None:
        diam = K.diameter()
        if diam == 0.0:
            raise ValueError("ill-conditioned fit: body has zero diameter, give radii explicitly")
        radii = np.geomspace(0.1, 1.0, 8) * diam
    radii = np.asarray(radii, dtype=float)
    if radii.size < n + 2:
        raise ValueError(f"need at least {n + 2} radii for a degree-{n} fit")
    A = np.vander(radii, n + 1, increasing=True)
    if np.linalg.cond(A) > 1e10:
        raise ValueError("ill-conditioned fit: radii too clustered")
    ss = np.random.SeedSequence(seed)
    vols, errs = [], []
    for child, t in zip(ss.spawn(radii.size), radii):
        v, e = mc_volume(K, t, n_samples, seed=child)
        vols.append(v)
        errs.append(e)
    vols, errs = np.array(vols), np.array(errs)
    W = 1.0 / np.maximum(errs, 1e-12 * np.maximum(vols, 1.0))
    coef, *_ = np.linalg.lstsq(A * W[:, None], vols * W, rcond=None)
    resid = float(np.sqrt(np.mean(((A @ coef - vols) * W) ** 2)))
    quermass = np.array([coef[n - k] / comb(n, n - k) for k in range(n + 1)])
    mw = mean_width_body(K, seed=seed).value
    ref = unit_ball_volume(n) * mw
    ratio = quermass[1] / ref if ref != 0 else np.nan
    return QuermassReport(
        quermass=quermass, residual=resid, radii=radii, volumes=vols,
        volume_errors=errs, v1_over_mean_width=float(ratio),
        volume_check=float(quermass[n] - K.volume()),
    )


def urysohn_body_gap(K: ConvexBody, n_samples=200_000, seed=0, volume_samples=1_000_000):
    """Classical Urysohn gap M*(K) - (|K| / |D|)^(1/n), Monte Carlo on both sides."""
    mw = mean_width_body(K, method="monte_carlo", n_samples=n_samples, seed=seed)
    vol, vol_err = mc_volume(K, 0.0, volume_samples, seed=seed + 1)
    rhs = (vol / unit_ball_volume(K.dim)) ** (1.0 / K.dim)
    return {"mean_width": mw.value, "mean_width_error": mw.std_error,
            "volume": vol, "volume_error": vol_err, "rhs": rhs, "gap": mw.value - rhs}
