"""
Cap Measure Component - uniform surface measure of spherical caps.

Evaluates the normalized measure of {x in S^{n-1} : <w, x> >= t}, which only
depends on the ambient dimension n and the threshold t.
"""

from .core import (
    CapMeasureEvaluator,
    DomainError,
    cap_measure,
    get_evaluator,
    normalization_constant,
    sin_power_integral,
)

__all__ = [
    "CapMeasureEvaluator",
    "DomainError",
    "cap_measure",
    "get_evaluator",
    "normalization_constant",
    "sin_power_integral",
]
