"""Radial potentials ``phi(x) = psi(|x|)`` with piecewise-quadratic profiles.

A profile is described on ``[0, R]`` (``R`` may be infinite) by knots
``0 = t_0 <= t_1 <= ... <= t_m = R`` and, on each ``[t_i, t_{i+1}]``, the
polynomial ``a_i r^2 / 2 + b_i r + c_i`` in the absolute variable ``r``.
Beyond ``R`` the profile is ``+inf``.  This family contains the Gaussian,
norm cones, ball indicators and the piecewise linear-quadratic potential
used by the sharpness family, and it is closed under constant shifts,
homothety, adding ``eps r^2 / 2``, clipping from below and conjugation,
so every radial computation stays exact and dimension-free.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .._quad import log_quad_pieces, log_sphere_area
from .base import INF, Potential
from .grid import ScreenResult

__all__ = [
    "PiecewiseQuadraticProfile",
    "RadialPotential",
    "radial_convexity_screen",
    "gaussian_profile",
    "norm_cone_profile",
    "ball_profile",
    "counterexample_profile",
]

_CONT_TOL = 1e-9


def _scale(*vals):
    finite = [abs(v) for v in vals if np.isfinite(v)]
    return max([1.0] + finite)


@dataclass(frozen=True)
class PiecewiseQuadraticProfile:
    """A lower semi-continuous piecewise-quadratic function on ``[0, R]``."""

    knots: tuple
    a: tuple
    b: tuple
    c: tuple

    def __post_init__(self):
        knots = tuple(float(t) for t in self.knots)
        a, b, c = (tuple(float(v) for v in arr) for arr in (self.a, self.b, self.c))
        m = len(a)
        if m < 1 or len(b) != m or len(c) != m or len(knots) != m + 1:
            raise ValueError("profile needs m pieces and m + 1 knots")
        if knots[0] != 0.0:
            raise ValueError("profile knots must start at 0")
        if any(t1 < t0 for t0, t1 in zip(knots[:-1], knots[1:])):
            raise ValueError("profile knots must be nondecreasing")
        if any(np.isinf(t) for t in knots[:-1]):
            raise ValueError("only the last knot may be infinite")
        if not all(np.isfinite(v) for v in a + b + c):
            raise ValueError("profile coefficients must be finite")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    # -- basic evaluation -------------------------------------------------
    @property
    def n_pieces(self):
        return len(self.a)

    @property
    def end(self):
        return self.knots[-1]

    def piece_value(self, i, r):
        return 0.5 * self.a[i] * r * r + self.b[i] * r + self.c[i]

    def piece_slope(self, i, r):
        return self.a[i] * r + self.b[i]

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        knots = np.asarray(self.knots)
        idx = np.clip(np.searchsorted(knots, r, side="right") - 1, 0, self.n_pieces - 1)
        a, b, c = (np.asarray(v)[idx] for v in (self.a, self.b, self.c))
        out = 0.5 * a * r * r + b * r + c
        out = np.where(r > self.end, INF, out)
        return float(out) if out.ndim == 0 else out

    def breakpoints(self):
        return np.asarray(self.knots)

    # -- structural maps --------------------------------------------------
    def add_constant(self, k):
        return PiecewiseQuadraticProfile(self.knots, self.a, self.b, tuple(ci + k for ci in self.c))

    def scaled(self, lam):
        """``lam * psi(r / lam)``."""
        lam = float(lam)
        return PiecewiseQuadraticProfile(
            tuple(lam * t for t in self.knots),
            tuple(ai / lam for ai in self.a),
            self.b,
            tuple(lam * ci for ci in self.c),
        )

    def add_quadratic(self, eps):
        """``psi(r) + eps r^2 / 2``."""
        return PiecewiseQuadraticProfile(self.knots, tuple(ai + eps for ai in self.a), self.b, self.c)

    def restricted(self, radius):
        """Same profile, ``+inf`` beyond ``radius``."""
        radius = float(radius)
        if radius >= self.end:
            return self
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        knots = np.asarray(self.knots)
        k = int(np.searchsorted(knots, radius, side="right"))
        k = max(k, 1)
        new_knots = tuple(knots[:k]) + (radius,)
        return PiecewiseQuadraticProfile(new_knots, self.a[:k], self.b[:k], self.c[:k])

    def simplified(self):
        """Drop zero-length pieces (keeping at least one) and merge equal neighbours."""
        K, A, B, C = [self.knots[0]], [], [], []
        for i in range(self.n_pieces):
            lo, hi = self.knots[i], self.knots[i + 1]
            if hi <= lo and (A or i < self.n_pieces - 1):
                continue
            if A and (A[-1], B[-1], C[-1]) == (self.a[i], self.b[i], self.c[i]):
                K[-1] = hi
                continue
            A.append(self.a[i])
            B.append(self.b[i])
            C.append(self.c[i])
            K.append(hi)
        return PiecewiseQuadraticProfile(tuple(K), tuple(A), tuple(B), tuple(C))

    def __add__(self, other):
        """Pointwise sum; the domain is the shorter of the two."""
        if not isinstance(other, PiecewiseQuadraticProfile):
            return NotImplemented
        end = min(self.end, other.end)
        inner = sorted(set(self.knots[1:-1]) | set(other.knots[1:-1]))
        knots = [0.0] + [t for t in inner if t < end] + [end]
        A, B, C = [], [], []
        for lo, hi in zip(knots[:-1], knots[1:]):
            mid = lo + 0.5 * (hi - lo) if np.isfinite(hi) else lo + 1.0
            i, j = self._index(mid), other._index(mid)
            A.append(self.a[i] + other.a[j])
            B.append(self.b[i] + other.b[j])
            C.append(self.c[i] + other.c[j])
        return PiecewiseQuadraticProfile(tuple(knots), tuple(A), tuple(B), tuple(C)).simplified()

    def _index(self, r):
        k = int(np.searchsorted(np.asarray(self.knots), r, side="right")) - 1
        return min(max(k, 0), self.n_pieces - 1)

    # -- order structure --------------------------------------------------
    def argmin(self):
        """Smallest minimizer on ``[0, R]`` and the minimum value."""
        best_r, best_v = 0.0, self.piece_value(0, 0.0)
        for i in range(self.n_pieces):
            lo, hi = self.knots[i], self.knots[i + 1]
            cands = [lo]
            if np.isfinite(hi):
                cands.append(hi)
            if self.a[i] > 0:
                r = -self.b[i] / self.a[i]
                if lo <= r <= hi:
                    cands.append(r)
            for r in cands:
                v = self.piece_value(i, r)
                if v < best_v - 1e-15 * _scale(best_v):
                    best_r, best_v = r, v
        return best_r, best_v

    def is_nondecreasing(self, tol=_CONT_TOL):
        return self.piece_slope(0, 0.0) >= -tol * _scale(self.b[0])

    def flattened(self):
        """Running minimum ``r -> min_{s <= r} psi(s)``; equals ``psi`` if nondecreasing."""
        r_min, v_min = self.argmin()
        if r_min == 0.0 and self.piece_slope(0, 0.0) >= 0:
            return self
        if r_min >= self.end:
            return PiecewiseQuadraticProfile((0.0, self.end), (0.0,), (0.0,), (v_min,))
        k = self._index(r_min)
        knots = (0.0, r_min) + tuple(t for t in self.knots[k + 1:])
        a = (0.0,) + self.a[k:]
        b = (0.0,) + self.b[k:]
        c = (v_min,) + self.c[k:]
        return PiecewiseQuadraticProfile(knots, a, b, c).simplified()

    def level_radius(self, level):
        """``sup {r : psi(r) <= level}`` for nondecreasing ``psi`` (``-1`` if empty)."""
        level = float(level)
        if self.piece_value(0, 0.0) > level:
            return -1.0
        last = self.n_pieces - 1
        if np.isinf(self.end):
            if self.a[last] == 0 and self.b[last] <= 0 and self.c[last] <= level:
                return INF
        elif self.piece_value(last, self.end) <= level:
            return self.end
        for i in range(self.n_pieces):
            lo, hi = self.knots[i], self.knots[i + 1]
            hi_val = self.piece_value(i, hi) if np.isfinite(hi) else INF
            if hi_val <= level:
                continue
            return _largest_root(self.a[i], self.b[i], self.c[i] - level, lo, hi)
        return self.end

    def clipped_below(self, level):
        """``max(psi, level)`` for nondecreasing ``psi``."""
        r = self.level_radius(level)
        if r < 0:
            return self
        if np.isinf(r) or r >= self.end:
            return PiecewiseQuadraticProfile((0.0, self.end), (0.0,), (0.0,), (float(level),))
        k = self._index(r)
        knots = (0.0, r) + tuple(t for t in self.knots[k + 1:])
        return PiecewiseQuadraticProfile(
            knots, (0.0,) + self.a[k:], (0.0,) + self.b[k:], (float(level),) + self.c[k:]
        ).simplified()

    # -- serialization ----------------------------------------------------
    def to_dict(self):
        return {"knots": list(self.knots), "a": list(self.a), "b": list(self.b), "c": list(self.c)}


def _largest_root(a, b, c, lo, hi):
    """Largest root in ``[lo, hi]`` of ``a r^2/2 + b r + c`` (increasing there), clamped."""
    if a == 0:
        r = -c / b if b != 0 else lo
    else:
        disc = b * b - 2 * a * c
        disc = max(disc, 0.0)
        s = sqrt(disc)
        # stable form of (-b + s) / a
        r = (-b + s) / a if b <= 0 else (-2 * c) / (b + s)
    return float(min(max(r, lo), hi))


def radial_convexity_screen(profile: PiecewiseQuadraticProfile, tol: float = _CONT_TOL) -> ScreenResult:
    """Check convexity, continuity and monotonicity of a profile.

    Failure witnesses are knot indices ``(i - 1, i, i + 1)``.
    """
    for i, a in enumerate(profile.a):
        if a < -tol:
            return ScreenResult(False, (i, i, i + 1), a, f"piece {i} is concave")
    for i in range(1, profile.n_pieces):
        t = profile.knots[i]
        left, right = profile.piece_value(i - 1, t), profile.piece_value(i, t)
        if abs(left - right) > tol * _scale(left, right, t * t):
            return ScreenResult(False, (i - 1, i, i + 1), right - left, f"jump at knot {i}")
        dl, dr = profile.piece_slope(i - 1, t), profile.piece_slope(i, t)
        if dr < dl - tol * _scale(dl, dr):
            return ScreenResult(False, (i - 1, i, i + 1), dr - dl, f"slope decreases at knot {i}")
    if not profile.is_nondecreasing(tol):
        return ScreenResult(False, (0, 0, 1), profile.piece_slope(0, 0.0), "profile decreases at 0")
    return ScreenResult(True)


class RadialPotential(Potential):
    """``phi(x) = psi(|x|)`` in any dimension.

    The profile is replaced by its running minimum, which is the only part
    visible to ``phi`` once it is required to be convex on R^n.
    """

    def __init__(self, profile: PiecewiseQuadraticProfile, dim: int, provenance: str = ""):
        if dim < 1:
            raise ValueError("dimension must be positive")
        screen = radial_convexity_screen(profile.flattened())
        if not screen:
            raise ValueError(f"radial profile is not convex: {screen.detail}")
        self.profile = profile.flattened()
        self.dim = int(dim)
        self.provenance = provenance or "radial"

    def _eval(self, x):
        return self.profile(np.linalg.norm(x, axis=1))

    def eval_radius(self, r):
        return self.profile(r)

    def with_profile(self, profile, provenance=None):
        return RadialPotential(profile, self.dim, provenance or self.provenance)

    def add_constant(self, c):
        return self.with_profile(self.profile.add_constant(c))

    def scaled(self, lam):
        if lam <= 0:
            raise ValueError("homothety factor must be positive")
        return self.with_profile(self.profile.scaled(lam))

    def translated(self, a):
        from .analytic import Translated

        return Translated(self, a)

    def log_integral(self):
        """log of ``|S^{n-1}| * int_0^R r^(n-1) exp(-psi(r)) dr``."""
        n = self.dim
        prof = self.profile

        def logf(r):
            with np.errstate(divide="ignore"):
                return (n - 1) * np.log(r) - prof(r) if n > 1 else -prof(r)

        scale = max(1.0, sqrt(n))
        return float(log_sphere_area(n) + log_quad_pieces(logf, prof.breakpoints(), scale))

    def gaussian_mean(self):
        """``E psi(|X|)`` for a standard Gaussian ``X`` (``inf`` if ``R`` is finite)."""
        from ..meanwidth import chi_expectation

        return chi_expectation(self.profile, self.dim)

    def to_grid(self, spec):
        from .grid import sample_on_grid

        return sample_on_grid(self, spec, f"sampled({self.provenance})")

    def __repr__(self):
        return f"RadialPotential(dim={self.dim}, knots={list(self.profile.knots)})"


def gaussian_profile(offset=0.0, precision=1.0):
    """``precision * r^2 / 2 + offset``."""
    return PiecewiseQuadraticProfile((0.0, INF), (float(precision),), (0.0,), (float(offset),))


def norm_cone_profile(alpha=1.0, offset=0.0):
    """``alpha * r + offset``."""
    return PiecewiseQuadraticProfile((0.0, INF), (0.0,), (float(alpha),), (float(offset),))


def ball_profile(radius=1.0, offset=0.0):
    """``offset`` on ``[0, radius]`` and ``+inf`` beyond."""
    return PiecewiseQuadraticProfile((0.0, float(radius)), (0.0,), (0.0,), (float(offset),))


def counterexample_profile(n):
    """0 on ``[0, sqrt n]``, ``2 sqrt(n) r - 2n`` up to ``2 sqrt n``, then ``r^2 / 2``."""
    s = sqrt(n)
    return PiecewiseQuadraticProfile(
        (0.0, s, 2 * s, INF), (0.0, 0.0, 1.0), (0.0, 2 * s, 0.0), (0.0, -2.0 * n, 0.0)
    )
