"""
Oracle Component - brute-force verification of the enumeration formula.

Scans a direction grid on S^1 or S^2 with the exact per-direction supremum
over thresholds, which gives a lower bound on the discrepancy that never
touches the subset algebra.
"""

from .core import GridSpec, OracleDimensionError, OracleError, Verdict, cross_check, grid_directions, grid_lower_bound

__all__ = [
    "GridSpec",
    "OracleDimensionError",
    "OracleError",
    "Verdict",
    "cross_check",
    "grid_directions",
    "grid_lower_bound",
]
