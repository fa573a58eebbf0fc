"""
Discrepancy Core Component - samples, caps and local discrepancies.

Provides the PointSet and Cap types, the empirical measure, the local
discrepancy of a single cap, the exact supremum over thresholds for a fixed
direction, and the cheap lower estimate taken over the sample directions.
"""

from .core import (
    AttainedSide,
    Cap,
    DirectionalSupremum,
    PointSet,
    PointSetError,
    directional_suprema,
    directional_supremum,
    empirical_count,
    empirical_measure,
    local_discrepancy,
    lower_bound,
    lower_bound_details,
)

__all__ = [
    "AttainedSide",
    "Cap",
    "DirectionalSupremum",
    "PointSet",
    "PointSetError",
    "directional_suprema",
    "directional_supremum",
    "empirical_count",
    "empirical_measure",
    "local_discrepancy",
    "lower_bound",
    "lower_bound_details",
]
