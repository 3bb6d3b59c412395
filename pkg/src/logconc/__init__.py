"""Convex analysis of log-concave functions: Legendre transforms, Asplund
products, both mean-width definitions, the functional Urysohn, Santalo and
Shannon inequalities, level-set volume ratios and low-M* experiments."""
from __future__ import annotations

from ._report import EstimateReport
from .calculus import asplund, homothety, rotate, scalar_mult, translate, truncate
from .core import (
    GridPotential,
    GridSpec,
    IndicatorBody,
    LogConcaveFn,
    PiecewiseQuadraticProfile,
    Potential,
    Quadratic,
    RadialPotential,
    convexity_screen,
    gaussian,
    sample_on_grid,
)
from .legendre import biconjugate, conjugate, legendre_1d, legendre_nd, legendre_radial
from .meanwidth import (
    GaussianMeasure,
    TildeConfig,
    check_definition_equality,
    gaussian_expectation,
    mean_width,
    mean_width_tilde,
    santalo_check,
    shannon_check,
    urysohn_gap,
)

__version__ = "0.1.0"

__all__ = [
    "EstimateReport",
    "LogConcaveFn",
    "Potential",
    "GridSpec",
    "GridPotential",
    "Quadratic",
    "IndicatorBody",
    "RadialPotential",
    "PiecewiseQuadraticProfile",
    "convexity_screen",
    "gaussian",
    "sample_on_grid",
    "conjugate",
    "biconjugate",
    "legendre_1d",
    "legendre_nd",
    "legendre_radial",
    "asplund",
    "homothety",
    "scalar_mult",
    "translate",
    "rotate",
    "truncate",
    "GaussianMeasure",
    "TildeConfig",
    "gaussian_expectation",
    "mean_width",
    "mean_width_tilde",
    "check_definition_equality",
    "urysohn_gap",
    "santalo_check",
    "shannon_check",
]
