"""Potentials (convex exponents) and the log-concave functions built on them.

Extended reals are IEEE doubles restricted to (-inf, +inf]: ``+inf`` is a
genuine infinity, so ``r + inf == inf``, ``min(r, inf) == r`` and in a
supremum objective ``<x, y> - inf == -inf`` never beats a finite candidate.
A huge finite sentinel would instead leak a slope into every conjugate.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "INF",
    "Potential",
    "LogConcaveFn",
    "eval_potential",
    "as_points",
]

INF = np.inf


def as_points(x, dim):
    """Coerce ``x`` to an array of points in R^dim (last axis = coordinates)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        if dim == 1 and x.ndim <= 1:
            return x[..., None]
        raise ValueError(f"dimension mismatch: potential has dim={dim}, got points of shape {x.shape}")
    return x


class Potential:
    """A convex function phi: R^n -> (-inf, +inf], not identically +inf.

    Subclasses implement ``_eval`` on an ``(m, n)`` array and the three
    structural maps the calculus needs (constant shift, homothety and
    translation).  ``provenance`` records how the object was produced.
    """

    dim: int
    provenance: str = ""

    def __call__(self, x):
        pts = as_points(x, self.dim)
        flat = pts.reshape(-1, self.dim)
        out = np.asarray(self._eval(flat), dtype=float)
        out = out.reshape(pts.shape[:-1])
        return float(out) if out.ndim == 0 else out

    def _eval(self, x):
        raise NotImplementedError

    def add_constant(self, c: float) -> "Potential":
        raise NotImplementedError(f"{type(self).__name__} does not support constant shifts")

    def scaled(self, lam: float) -> "Potential":
        """The potential of the lambda-homothety: ``lam * phi(x / lam)``."""
        raise NotImplementedError(f"{type(self).__name__} does not support homothety")

    def translated(self, a) -> "Potential":
        """``phi(x - a)``."""
        raise NotImplementedError(f"{type(self).__name__} does not support translation")

    def log_integral(self) -> float:
        """``log of the integral of exp(-phi)`` over R^n (may be +inf)."""
        raise NotImplementedError(f"{type(self).__name__} has no integral routine")

    def with_provenance(self, text: str) -> "Potential":
        self.provenance = text
        return self


def eval_potential(phi: Potential, x):
    """Evaluate ``phi`` at a point or an array of points."""
    return phi(x)


class LogConcaveFn:
    """f = exp(-phi).  Only the potential is stored."""

    def __init__(self, phi: Potential, name: str = ""):
        if not isinstance(phi, Potential):
            raise TypeError("LogConcaveFn wraps a Potential")
        self.phi = phi
        self.name = name or getattr(phi, "provenance", "") or type(phi).__name__

    @property
    def dim(self) -> int:
        return self.phi.dim

    def __call__(self, x):
        return np.exp(-np.asarray(self.phi(x)))

    def log_integral(self) -> float:
        return self.phi.log_integral()

    def integral(self) -> float:
        return float(np.exp(self.log_integral()))

    def __repr__(self):
        return f"LogConcaveFn({self.name}, dim={self.dim})"
