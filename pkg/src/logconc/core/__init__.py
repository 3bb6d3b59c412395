"""Potentials, their representations and evaluation."""
from __future__ import annotations

from .analytic import BodySupport, IndicatorBody, LinearTilt, MaxAffine, Quadratic, Translated
from .base import INF, LogConcaveFn, Potential, as_points, eval_potential
from .grid import (
    GridPotential,
    GridSpec,
    ScreenResult,
    format_grid,
    grid_convexity_screen,
    parse_grid,
    read_grid,
    sample_on_grid,
    write_grid,
)
from .radial import (
    PiecewiseQuadraticProfile,
    RadialPotential,
    ball_profile,
    counterexample_profile,
    gaussian_profile,
    norm_cone_profile,
    radial_convexity_screen,
)

__all__ = [
    "INF",
    "Potential",
    "LogConcaveFn",
    "eval_potential",
    "as_points",
    "GridSpec",
    "GridPotential",
    "ScreenResult",
    "convexity_screen",
    "sample_on_grid",
    "read_grid",
    "write_grid",
    "parse_grid",
    "format_grid",
    "Quadratic",
    "IndicatorBody",
    "BodySupport",
    "MaxAffine",
    "Translated",
    "LinearTilt",
    "PiecewiseQuadraticProfile",
    "RadialPotential",
    "gaussian_profile",
    "norm_cone_profile",
    "ball_profile",
    "counterexample_profile",
    "gaussian",
]


def convexity_screen(phi, tol=None) -> ScreenResult:
    """Discrete convexity screen for grid potentials and radial profiles.

    Returns a :class:`ScreenResult`; on failure ``witness`` holds the
    violating index triple.
    """
    if isinstance(phi, GridPotential):
        return grid_convexity_screen(phi, tol)
    if isinstance(phi, RadialPotential):
        phi = phi.profile
    if isinstance(phi, PiecewiseQuadraticProfile):
        return radial_convexity_screen(phi) if tol is None else radial_convexity_screen(phi, tol)
    raise TypeError(f"convexity_screen needs a grid or radial potential, got {type(phi).__name__}")


def gaussian(dim: int, center=None, offset: float = 0.0) -> Quadratic:
    """The potential ``|x - a|^2 / 2 + c`` of ``exp(-c) G(x - a)``."""
    return Quadratic(dim, center, offset, provenance="gaussian")
