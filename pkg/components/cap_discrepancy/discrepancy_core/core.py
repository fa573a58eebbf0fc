"""
Core types and local discrepancy operations for the discrepancy_core component.

A cap is the closed halfspace H(w, t) = {x : <w, x> >= t} intersected with the
sphere. Points with <w, x> == t are inside; comparisons carry no tolerance
unless the caller passes one explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from cap_discrepancy.cap_measure import DomainError, get_evaluator

FloatArray = NDArray[np.float64]

POINT_NORM_TOLERANCE = 1e-9
DIRECTION_NORM_TOLERANCE = 1e-8
MACHINE_UNIT_SLACK = 8 * np.finfo(np.float64).eps


class PointSetError(DomainError):
    """Invalid sample: wrong shape, too few points or non-unit points."""


class AttainedSide(str, Enum):
    """Where a directional supremum is realized."""

    AT_THRESHOLD = "at-threshold"
    LIMIT_FROM_ABOVE = "limit-from-above"


@dataclass(frozen=True, eq=False)
class PointSet:
    """N unit vectors of R^n stored row-wise, shape (N, n)."""

    points: FloatArray

    @classmethod
    def from_array(cls, data: ArrayLike, tolerance: float = POINT_NORM_TOLERANCE) -> PointSet:
        """Validate a raw (N, n) array and renormalize it to machine precision.

        Raises:
            PointSetError: If the array is not 2-D, n < 2, N < 1, or some row
                deviates from unit norm by more than ``tolerance``
        """
        try:
            arr = np.array(data, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise PointSetError(f"Points are not a numeric array: {e}") from e

        if arr.ndim != 2:
            raise PointSetError(
                f"Points must be a 2-D array, got {arr.ndim} dimension(s)", {"shape": arr.shape}
            )
        count, dim = arr.shape
        if count < 1:
            raise PointSetError("Point set is empty", {"shape": arr.shape})
        if dim < 2:
            raise PointSetError(f"Ambient dimension must be >= 2, got {dim}", {"shape": arr.shape})
        if not np.all(np.isfinite(arr)):
            raise PointSetError("Point set contains non-finite values", {"shape": arr.shape})

        norms = np.linalg.norm(arr, axis=1)
        offenders = np.flatnonzero(np.abs(norms - 1.0) > tolerance)
        if offenders.size:
            raise PointSetError(
                f"{offenders.size} point(s) are not unit vectors",
                {
                    "offenders": [(int(i), float(norms[i])) for i in offenders],
                    "tolerance": tolerance,
                },
            )

        # Rows already unit to machine precision are kept bit-for-bit.
        scale = np.where(np.abs(norms - 1.0) <= MACHINE_UNIT_SLACK, 1.0, norms)
        normalized = arr / scale[:, None]
        normalized.setflags(write=False)
        return cls(normalized)

    @property
    def n(self) -> int:
        """Ambient dimension."""
        return int(self.points.shape[1])

    @property
    def N(self) -> int:  # noqa: N802
        """Sample size."""
        return int(self.points.shape[0])

    @cached_property
    def gram(self) -> FloatArray:
        """The N x N Gram matrix X^T X of the sample."""
        g = self.points @ self.points.T
        g.setflags(write=False)
        return g

    def dots(self, w: FloatArray) -> FloatArray:
        """Inner products <w, x^i> for all sample points."""
        return self.points @ w

    def __len__(self) -> int:
        return self.N


@dataclass(frozen=True, eq=False)
class Cap:
    """Closed cap {x : <w, x> >= t}."""

    w: FloatArray
    t: float

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "t", float(self.t))
        norm = float(np.linalg.norm(w))
        if w.ndim != 1 or abs(norm - 1.0) > DIRECTION_NORM_TOLERANCE:
            raise DomainError("Cap direction is not a unit vector", {"norm": norm, "shape": w.shape})
        if not -1.0 <= self.t <= 1.0:
            raise DomainError(f"Cap threshold outside [-1, 1]: {self.t}", {"t": self.t})

    def negated(self) -> Cap:
        """The reflected cap (-w, -t)."""
        return Cap(-self.w, -self.t)

    def to_dict(self) -> dict[str, Any]:
        return {"w": self.w.tolist(), "t": self.t}


@dataclass(frozen=True)
class DirectionalSupremum:
    """Supremum over t of the local discrepancy for one direction."""

    value: float
    argmax_t: float
    attained_side: AttainedSide

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "argmax_t": self.argmax_t,
            "attained_side": self.attained_side.value,
        }


def _check_dimension(ps: PointSet, w: FloatArray) -> None:
    if w.shape != (ps.n,):
        raise DomainError(
            f"Direction has shape {w.shape}, expected ({ps.n},)",
            {"shape": w.shape, "n": ps.n},
        )


def empirical_count(ps: PointSet, cap: Cap, tolerance: float = 0.0) -> int:
    """Number of sample points with <w, x^i> >= t - tolerance."""
    _check_dimension(ps, cap.w)
    return int(np.count_nonzero(ps.dots(cap.w) >= cap.t - tolerance))


def empirical_measure(ps: PointSet, cap: Cap, tolerance: float = 0.0) -> float:
    """Fraction of sample points inside the closed cap."""
    return empirical_count(ps, cap, tolerance) / ps.N


def local_discrepancy(ps: PointSet, cap: Cap, tolerance: float = 0.0) -> float:
    """|empirical measure - cap measure| for one cap."""
    emp = empirical_measure(ps, cap, tolerance)
    return abs(emp - get_evaluator(ps.n).cap_measure(cap.t))


def _suprema_from_rows(rows: FloatArray, n: int) -> tuple[FloatArray, FloatArray, NDArray[np.bool_]]:
    """Directional suprema for a batch of inner-product rows, shape (M, N).

    The empirical measure is a step function of t that only jumps at the
    inner products, and the cap measure is continuous and non-increasing, so
    every candidate sits at an inner product v: either attained at t = v
    (count #{d >= v}) or approached from above (count #{d > v}).

    Returns:
        (values, argmax thresholds, at-threshold flags), one entry per row
    """
    descending = -np.sort(-rows, axis=1)
    count = descending.shape[1]
    positions = np.arange(count)

    run_starts = np.ones(descending.shape, dtype=bool)
    run_starts[:, 1:] = descending[:, 1:] != descending[:, :-1]
    run_ends = np.ones(descending.shape, dtype=bool)
    run_ends[:, :-1] = run_starts[:, 1:]
    first_of_run = np.maximum.accumulate(np.where(run_starts, positions, 0), axis=1)
    last_of_run = np.minimum.accumulate(
        np.where(run_ends, positions, count - 1)[:, ::-1], axis=1
    )[:, ::-1]

    measure = get_evaluator(n).cap_measure(np.clip(descending, -1.0, 1.0))
    candidates = np.empty((descending.shape[0], 2 * count))
    candidates[:, 0::2] = np.abs((last_of_run + 1) / count - measure)
    candidates[:, 1::2] = np.abs(first_of_run / count - measure)

    best = np.argmax(candidates, axis=1)
    rows_index = np.arange(descending.shape[0])
    values = candidates[rows_index, best]
    thresholds = np.clip(descending[rows_index, best // 2], -1.0, 1.0)
    return values, thresholds, best % 2 == 0


def _as_supremum(value: float, threshold: float, attained: bool) -> DirectionalSupremum:
    side = AttainedSide.AT_THRESHOLD if attained else AttainedSide.LIMIT_FROM_ABOVE
    return DirectionalSupremum(float(value), float(threshold), side)


def directional_supremum(ps: PointSet, w: ArrayLike) -> DirectionalSupremum:
    """Exact supremum over t in [-1, 1] of the local discrepancy for direction w.

    Raises:
        DomainError: If w is not a unit vector of matching dimension or the
            point set is empty
    """
    w_arr = np.asarray(w, dtype=np.float64)
    _check_dimension(ps, w_arr)
    norm = float(np.linalg.norm(w_arr))
    if abs(norm - 1.0) > DIRECTION_NORM_TOLERANCE:
        raise DomainError("Direction is not a unit vector", {"norm": norm})
    if ps.N == 0:
        raise DomainError("Directional supremum of an empty point set")
    values, thresholds, attained = _suprema_from_rows(ps.dots(w_arr / norm)[None, :], ps.n)
    return _as_supremum(values[0], thresholds[0], bool(attained[0]))


def directional_suprema(ps: PointSet, directions: ArrayLike, chunk_size: int = 4096) -> FloatArray:
    """Supremum values for many unit directions given row-wise, shape (M, n)."""
    dirs = np.asarray(directions, dtype=np.float64)
    if dirs.ndim != 2 or dirs.shape[1] != ps.n:
        raise DomainError(
            f"Directions must have shape (M, {ps.n}), got {dirs.shape}", {"shape": dirs.shape}
        )
    out = np.empty(dirs.shape[0])
    for start in range(0, dirs.shape[0], chunk_size):
        block = dirs[start : start + chunk_size]
        out[start : start + block.shape[0]] = _suprema_from_rows(block @ ps.points.T, ps.n)[0]
    return out


def lower_bound_details(ps: PointSet, chunk_size: int = 256) -> list[DirectionalSupremum]:
    """Directional suprema along every sample point, in sample order."""
    details: list[DirectionalSupremum] = []
    for start in range(0, ps.N, chunk_size):
        values, thresholds, attained = _suprema_from_rows(ps.gram[start : start + chunk_size], ps.n)
        details.extend(_as_supremum(v, t, bool(a)) for v, t, a in zip(values, thresholds, attained))
    return details


def lower_bound(ps: PointSet) -> float:
    """Lower estimate: maximum directional supremum over the sample directions."""
    return max(entry.value for entry in lower_bound_details(ps))
