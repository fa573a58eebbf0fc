"""
Enumerator Component - exact spherical cap discrepancy by subset enumeration.

Walks every index set up to min{n, rank X~} depth-first, classifies it,
evaluates the induced candidate caps and reduces to the discrepancy with a
deterministic argmax, optionally across worker processes.
"""

from .core import (
    DiscrepancyReport,
    EnumerationConfig,
    EnumerationError,
    GlobalRankInfo,
    enumerate_discrepancy,
    global_rank_bound,
    subset_space_size,
)

__all__ = [
    "DiscrepancyReport",
    "EnumerationConfig",
    "EnumerationError",
    "GlobalRankInfo",
    "enumerate_discrepancy",
    "global_rank_bound",
    "subset_space_size",
]
