"""One-dimensional integration helpers working in log space.

Radial reductions turn n-dimensional integrals into integrals over
``r >= 0`` with weights like ``r^(n-1)``; for large ``n`` these overflow
unless the integrand is handled through its logarithm.
"""
from __future__ import annotations

import warnings
from math import lgamma, log, pi

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

__all__ = ["log_quad", "log_quad_pieces", "log_sphere_area", "chi_log_density", "chi_window"]

_DROP = 60.0  # integrand below exp(max - _DROP) is negligible at double precision
_SAMPLES = 4001


def log_sphere_area(n: int) -> float:
    """log of the surface area of the unit sphere in R^n, i.e. log(n |D_n|)."""
    return log(2.0) + 0.5 * n * log(pi) - lgamma(0.5 * n)


def chi_log_density(r, n: int):
    """log density of |X| for X standard Gaussian in R^n."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        logr = np.log(r)
    const = (0.5 * n - 1.0) * log(2.0) + lgamma(0.5 * n)
    if n == 1:
        return -0.5 * r * r - const
    return (n - 1) * logr - 0.5 * r * r - const


def chi_window(n: int, width: float = 12.0):
    """An interval carrying all but ~exp(-width^2/2) of the chi_n mass."""
    mode = np.sqrt(max(n - 1, 0))
    return max(0.0, mode - width), mode + width


def _safe(logf, x):
    with np.errstate(all="ignore"):
        v = np.asarray(logf(np.asarray(x, dtype=float)), dtype=float)
    return np.where(np.isnan(v), -np.inf, v)


def _effective_upper(logf, lo, scale):
    """Push an infinite upper limit out until the integrand is negligible."""
    x = lo + scale
    best = _safe(logf, np.array([x]))[0]
    for _ in range(200):
        nxt = lo + 2 * (x - lo)
        v = _safe(logf, np.array([nxt]))[0]
        best = max(best, v)
        x = nxt
        if v < best - _DROP - 10 and v < _safe(logf, np.array([lo + 0.5 * (x - lo)]))[0]:
            return x
    return x


def log_quad(logf, lo: float, hi: float, scale: float = 1.0) -> float:
    """log of the integral of ``exp(logf(r))`` over ``[lo, hi]``.

    ``logf`` must be vectorized and may return ``-inf``.  The integrand is
    assumed to have at most a few modes (true for all radial integrands
    used here).  ``hi`` may be ``inf``.
    """
    if hi <= lo:
        return -np.inf
    if not np.isfinite(hi):
        hi = _effective_upper(logf, lo, scale)
    xs = np.linspace(lo, hi, _SAMPLES)
    vals = _safe(logf, xs)
    m = vals.max()
    if not np.isfinite(m):
        if m == np.inf:
            return np.inf
        return -np.inf
    keep = np.nonzero(vals >= m - _DROP)[0]
    a = xs[max(keep[0] - 1, 0)]
    b = xs[min(keep[-1] + 1, _SAMPLES - 1)]
    peak = float(xs[np.argmax(vals)])
    pts = [p for p in (peak,) if a < p < b]

    def g(r):
        v = _safe(logf, np.array([r]))[0]
        return np.exp(v - m)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(g, a, b, points=pts or None, limit=400, epsabs=0.0, epsrel=1e-12)
    if val <= 0:
        return -np.inf
    return float(m + np.log(val))


def log_quad_pieces(logf, breaks, scale: float = 1.0) -> float:
    """:func:`log_quad` over consecutive intervals ``breaks[i]..breaks[i+1]``."""
    parts = [log_quad(logf, lo, hi, scale) for lo, hi in zip(breaks[:-1], breaks[1:]) if hi > lo]
    parts = [p for p in parts if p > -np.inf]
    if not parts:
        return -np.inf
    return float(logsumexp(parts))
