"""Closed-form potentials.

Each class evaluates exactly.  Where it is cheap, a class also knows its
own integral (``log_integral``) and its mean under the standard Gaussian
measure (``gaussian_mean``); integration front ends use these as exact
oracles.
"""
from __future__ import annotations

from math import lgamma, log, pi, sqrt

import numpy as np

from ..bodies import Ball, Box, ConvexBody, unit_ball_volume
from .base import INF, Potential

__all__ = [
    "Quadratic",
    "IndicatorBody",
    "BodySupport",
    "MaxAffine",
    "Translated",
    "LinearTilt",
    "BoxProximalSupport",
    "BodyMoreau",
    "BodySupportQuadratic",
]

_CHUNK = 2_000_000


def _vec(a, dim):
    return np.broadcast_to(np.asarray(a, dtype=float), (dim,)).copy()


class Quadratic(Potential):
    """``phi(x) = (x - a)^T A (x - a) / 2 + c`` with ``A`` symmetric positive definite.

    ``A`` defaults to the identity, giving the Gaussian family
    ``C exp(-|x - a|^2 / 2)``.
    """

    def __init__(self, dim=None, center=None, offset=0.0, precision=None, provenance=""):
        if dim is None:
            if center is not None:
                dim = np.atleast_1d(center).shape[0]
            elif precision is not None:
                dim = np.atleast_2d(precision).shape[0]
            else:
                raise ValueError("Quadratic needs dim, center or precision")
        self.dim = int(dim)
        self.center = _vec(0.0 if center is None else center, self.dim)
        self.offset = float(offset)
        if precision is None:
            A = np.eye(self.dim)
        else:
            A = np.asarray(precision, dtype=float)
            if A.ndim == 0 or A.ndim == 1:
                A = np.diag(np.broadcast_to(A, (self.dim,)))
        if A.shape != (self.dim, self.dim) or not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("precision must be a symmetric (dim x dim) matrix")
        eig = np.linalg.eigvalsh(A)
        if eig.min() <= 0:
            raise ValueError("precision must be positive definite")
        self.precision = A
        self.provenance = provenance or "quadratic"

    @property
    def is_isotropic(self):
        return np.array_equal(self.precision, self.precision[0, 0] * np.eye(self.dim))

    def _eval(self, x):
        d = x - self.center
        return 0.5 * np.einsum("ij,jk,ik->i", d, self.precision, d) + self.offset

    def add_constant(self, c):
        return Quadratic(self.dim, self.center, self.offset + c, self.precision, self.provenance)

    def scaled(self, lam):
        lam = float(lam)
        if lam <= 0:
            raise ValueError("homothety factor must be positive")
        return Quadratic(self.dim, lam * self.center, lam * self.offset, self.precision / lam, self.provenance)

    def translated(self, a):
        return Quadratic(self.dim, self.center + _vec(a, self.dim), self.offset, self.precision, self.provenance)

    def log_integral(self):
        _, logdet = np.linalg.slogdet(self.precision)
        return 0.5 * self.dim * log(2 * pi) - 0.5 * logdet - self.offset

    def gaussian_mean(self):
        a = self.center
        return 0.5 * (np.trace(self.precision) + a @ self.precision @ a) + self.offset

    def __repr__(self):
        return f"Quadratic(dim={self.dim}, center={self.center.tolist()}, offset={self.offset:g})"


class IndicatorBody(Potential):
    """``phi = offset`` on the body ``K`` and ``+inf`` outside."""

    def __init__(self, body: ConvexBody, offset=0.0, provenance=""):
        self.body = body
        self.offset = float(offset)
        self.dim = body.dim
        self.provenance = provenance or f"indicator({type(body).__name__})"

    def _eval(self, x):
        return np.where(self.body.contains(x), self.offset, INF)

    def add_constant(self, c):
        return IndicatorBody(self.body, self.offset + c, self.provenance)

    def scaled(self, lam):
        if lam <= 0:
            raise ValueError("homothety factor must be positive")
        return IndicatorBody(self.body.scaled(lam), lam * self.offset, self.provenance)

    def translated(self, a):
        return IndicatorBody(self.body.translated(a), self.offset, self.provenance)

    def log_integral(self):
        vol = self.body.volume()
        return (log(vol) if vol > 0 else -INF) - self.offset


class BodySupport(Potential):
    """``phi(x) = h_K(x) - offset``: the conjugate of :class:`IndicatorBody`."""

    def __init__(self, body: ConvexBody, offset=0.0, provenance=""):
        self.body = body
        self.offset = float(offset)
        self.dim = body.dim
        self.provenance = provenance or f"support({type(body).__name__})"

    def _eval(self, x):
        return self.body.support(x) - self.offset

    def add_constant(self, c):
        return BodySupport(self.body, self.offset - c, self.provenance)

    def scaled(self, lam):
        if lam <= 0:
            raise ValueError("homothety factor must be positive")
        return BodySupport(self.body, lam * self.offset, self.provenance)

    def translated(self, a):
        return Translated(self, a)

    def log_integral(self):
        """Closed forms for boxes and balls containing the origin."""
        K = self.body
        if isinstance(K, Box):
            lo, hi = np.asarray(K.lower), np.asarray(K.upper)
            if np.any(lo >= 0) or np.any(hi <= 0):
                return INF
            return float(np.sum(np.log(1 / hi + 1 / (-lo)))) + self.offset
        if isinstance(K, Ball) and np.allclose(K.center, 0):
            n = self.dim
            if K.radius <= 0:
                return INF
            return log(n * unit_ball_volume(n)) + lgamma(n) - n * log(K.radius) + self.offset
        raise NotImplementedError(f"no closed-form integral for support of {type(K).__name__}")

    def gaussian_mean(self):
        K = self.body
        if isinstance(K, Box):
            return float(np.sum(np.asarray(K.upper) - np.asarray(K.lower))) / sqrt(2 * pi) - self.offset
        if isinstance(K, Ball):
            n = self.dim
            chi_mean = sqrt(2) * np.exp(lgamma((n + 1) / 2) - lgamma(n / 2))
            return K.radius * chi_mean - self.offset
        return None


class MaxAffine(Potential):
    """``phi(x) = max_k (<s_k, x> + b_k)``: a polyhedral convex function.

    This is the exact conjugate of a potential supported on finitely many
    points: with ``s_k`` the nodes and ``b_k = -psi(s_k)``.
    """

    def __init__(self, slopes, intercepts, provenance=""):
        slopes = np.asarray(slopes, dtype=float)
        if slopes.ndim == 1:
            slopes = slopes[:, None]
        intercepts = np.asarray(intercepts, dtype=float).ravel()
        keep = np.isfinite(intercepts)
        if not keep.any():
            raise ValueError("empty effective domain: no finite affine pieces")
        self.slopes = slopes[keep]
        self.intercepts = intercepts[keep]
        self.dim = self.slopes.shape[1]
        self.provenance = provenance or "max-affine"

    def _eval(self, x):
        m = len(self.intercepts)
        step = max(1, _CHUNK // max(m, 1))
        out = np.empty(len(x))
        for i in range(0, len(x), step):
            out[i:i + step] = np.max(x[i:i + step] @ self.slopes.T + self.intercepts, axis=1)
        return out

    def argmax(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.argmax(x @ self.slopes.T + self.intercepts, axis=1)

    def add_constant(self, c):
        return MaxAffine(self.slopes, self.intercepts + c, self.provenance)

    def scaled(self, lam):
        if lam <= 0:
            raise ValueError("homothety factor must be positive")
        return MaxAffine(self.slopes, lam * self.intercepts, self.provenance)

    def translated(self, a):
        a = _vec(a, self.dim)
        return MaxAffine(self.slopes, self.intercepts - self.slopes @ a, self.provenance)

    def log_integral(self):
        return INF

    def pieces_1d(self):
        """For ``dim == 1``: the active pieces as ``(breaks, slopes, intercepts)``.

        Piece ``k`` is active on ``[breaks[k], breaks[k+1]]`` with
        ``breaks[0] = -inf`` and ``breaks[-1] = +inf``.
        """
        if self.dim != 1:
            raise ValueError("pieces_1d needs dim == 1")
        s = self.slopes[:, 0]
        b = self.intercepts
        order = np.lexsort((-b, s))
        s, b = s[order], b[order]
        uniq = np.concatenate([[True], s[1:] != s[:-1]])
        s, b = s[uniq], b[uniq]
        hull = []
        for k in range(len(s)):
            while len(hull) >= 2:
                i, j = hull[-2], hull[-1]
                # j is dominated if the i/k crossing is left of the i/j crossing
                if (b[k] - b[i]) * (s[j] - s[i]) >= (b[j] - b[i]) * (s[k] - s[i]):
                    hull.pop()
                else:
                    break
            hull.append(k)
        s, b = s[hull], b[hull]
        breaks = np.concatenate([[-INF], -(b[1:] - b[:-1]) / (s[1:] - s[:-1]), [INF]])
        return breaks, s, b

    def gaussian_mean(self):
        if self.dim != 1:
            return None
        from scipy.stats import norm

        breaks, s, b = self.pieces_1d()
        lo, hi = breaks[:-1], breaks[1:]
        return float(np.sum(s * (norm.pdf(lo) - norm.pdf(hi)) + b * (norm.cdf(hi) - norm.cdf(lo))))


class Translated(Potential):
    """``phi(x - a)`` for an arbitrary base potential."""

    def __init__(self, base: Potential, shift, provenance=""):
        self.base = base
        self.dim = base.dim
        self.shift = _vec(shift, self.dim)
        self.provenance = provenance or f"({base.provenance}) shifted"

    def _eval(self, x):
        return self.base(x - self.shift)

    def add_constant(self, c):
        return Translated(self.base.add_constant(c), self.shift)

    def scaled(self, lam):
        return Translated(self.base.scaled(lam), lam * self.shift)

    def translated(self, a):
        return Translated(self.base, self.shift + _vec(a, self.dim))

    def log_integral(self):
        return self.base.log_integral()


class LinearTilt(Potential):
    """``phi(x) + <x, a>``: the conjugate of a translate."""

    def __init__(self, base: Potential, tilt, provenance=""):
        self.base = base
        self.dim = base.dim
        self.tilt = _vec(tilt, self.dim)
        self.provenance = provenance or f"({base.provenance}) tilted"

    def _eval(self, x):
        return self.base(x) + x @ self.tilt

    def add_constant(self, c):
        return LinearTilt(self.base.add_constant(c), self.tilt)

    def scaled(self, lam):
        return LinearTilt(self.base.scaled(lam), self.tilt)

    def translated(self, a):
        a = _vec(a, self.dim)
        return LinearTilt(Translated(self.base, a), self.tilt).add_constant(-float(a @ self.tilt))

    def gaussian_mean(self):
        gm = getattr(self.base, "gaussian_mean", None)
        return gm() if gm is not None else None


class BoxProximalSupport(Potential):
    """``sup_{z in [l, u]} (<x, z> - eps |z|^2 / 2) - offset``.

    The conjugate of a box indicator plus ``eps |z|^2 / 2``; it separates
    over coordinates with maximizer ``z_i = clip(x_i / eps, l_i, u_i)``.
    """

    def __init__(self, box: Box, eps: float, offset=0.0, provenance=""):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.box = box
        self.eps = float(eps)
        self.offset = float(offset)
        self.dim = box.dim
        self.provenance = provenance or "box proximal support"

    def _eval(self, x):
        z = np.clip(x / self.eps, self.box.lower, self.box.upper)
        return np.sum(x * z - 0.5 * self.eps * z * z, axis=1) - self.offset

    def add_constant(self, c):
        return BoxProximalSupport(self.box, self.eps, self.offset - c, self.provenance)


class BodyMoreau(Potential):
    """``phi(x) = dist(x, K)^2 / 2 + offset``: a body indicator Asplund-multiplied by ``G``."""

    def __init__(self, body: ConvexBody, offset=0.0, provenance=""):
        self.body = body
        self.offset = float(offset)
        self.dim = body.dim
        self.provenance = provenance or f"moreau({type(body).__name__})"

    def _eval(self, x):
        d = self.body.distance(x)
        return 0.5 * d * d + self.offset

    def add_constant(self, c):
        return BodyMoreau(self.body, self.offset + c, self.provenance)

    def translated(self, a):
        return BodyMoreau(self.body.translated(a), self.offset, self.provenance)

    def log_integral(self):
        """Boxes separate: each coordinate contributes ``(u - l) + sqrt(2 pi)``."""
        K = self.body
        if isinstance(K, Box):
            width = np.asarray(K.upper) - np.asarray(K.lower)
            return float(np.sum(np.log(width + sqrt(2 * pi)))) - self.offset
        raise NotImplementedError(f"no closed-form integral for the Moreau envelope of {type(K).__name__}")


class BodySupportQuadratic(Potential):
    """``phi(x) = h_K(x) + |x|^2 / 2 - offset``: the conjugate of :class:`BodyMoreau`."""

    def __init__(self, body: ConvexBody, offset=0.0, provenance=""):
        self.body = body
        self.offset = float(offset)
        self.dim = body.dim
        self.provenance = provenance or f"support+quadratic({type(body).__name__})"

    def _eval(self, x):
        return self.body.support(x) + 0.5 * np.sum(x * x, axis=1) - self.offset

    def add_constant(self, c):
        return BodySupportQuadratic(self.body, self.offset - c, self.provenance)

    def gaussian_mean(self):
        base = BodySupport(self.body).gaussian_mean()
        return None if base is None else base + 0.5 * self.dim - self.offset
