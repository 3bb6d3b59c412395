"""Numeric result container shared by the integration front ends."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["EstimateReport", "jsonable"]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and infinities for JSON output.

    JSON has no infinity literal, so +/-inf become the strings "inf"/"-inf".
    """
    try:
        import numpy as np
    except ImportError:  # pragma: no cover
        np = None
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if np is not None and isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if np is not None and isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
    return obj


@dataclass
class EstimateReport:
    """A numeric estimate with its statistical error and provenance.

    ``value`` may be ``+inf``; in that case ``diagnostics`` names the
    divergence witness.  ``std_error`` is 0 for deterministic quadrature.
    """

    value: float
    std_error: float = 0.0
    method: str = "quadrature"
    n_samples: int = 0
    seed: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")

    @property
    def is_infinite(self):
        return math.isinf(self.value)

    def to_dict(self):
        return jsonable({
            "value": self.value,
            "std_error": self.std_error,
            "method": self.method,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
            "_meta": {
                "value": "estimate (dimensionless; 'inf' when divergent)",
                "std_error": "one standard error of the estimate (0 for deterministic quadrature)",
                "n_samples": "number of integrand evaluations",
            },
        })
