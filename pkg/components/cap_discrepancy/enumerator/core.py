"""
Core enumeration engine for the enumerator component.

Index sets are generated depth-first in lexicographic order. Every node of
the search is an affinely independent prefix; all of its one-element
extensions are rank-tested, classified and evaluated as a single batch, and
only independent extensions are descended into. A dependent subset stays
dependent under every extension, so its whole subtree is pruned and
accounted for in the ledger.

The work is split by first index into contiguous blocks; blocks run in
worker processes and are merged with a total-order tie-break, so the result
does not depend on the worker count or block boundaries.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from cap_discrepancy.cap_measure import get_evaluator
from cap_discrepancy.discrepancy_core import Cap, PointSet, empirical_measure
from cap_discrepancy.subset_algebra import (
    ContractViolation,
    DegenerateSubsetError,
    ExtensionBatch,
    PrefixFactor,
    SubsetFamily,
    gamma,
    phi0_kernel_direction,
    phi1_cap,
)
from cap_discrepancy.subset_algebra.core import FEASIBILITY_TOLERANCE, KernelConvention
from cap_discrepancy.unified_logger import get_logger

FloatArray = NDArray[np.float64]

DEBUG_DOT_TOLERANCE = 1e-9
BLOCKS_PER_WORKER = 4

logger = get_logger(__name__)


class EnumerationError(Exception):
    """Exception raised when the enumeration cannot produce a valid report."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


@dataclass(frozen=True)
class EnumerationConfig:
    """Numerical tolerances and parallelism of one enumeration run.

    ``boundary_tol`` widens the closed halfspace test for candidate caps:
    their thresholds come from a linear solve, so sample points lying on
    the boundary carry rounding error in their inner products.
    """

    gamma_tol: float = 1e-10
    rank_tol: float = 1e-10
    boundary_tol: float = 1e-12
    thread_count: int = 1
    kernel_convention: KernelConvention = "last"
    debug_check: bool = False

    def __post_init__(self) -> None:
        if self.thread_count < 1:
            raise EnumerationError(
                f"thread_count must be >= 1, got {self.thread_count}",
                {"thread_count": self.thread_count},
            )
        for name in ("gamma_tol", "rank_tol", "boundary_tol"):
            if getattr(self, name) < 0:
                raise EnumerationError(f"{name} must be non-negative", {name: getattr(self, name)})

    @classmethod
    def from_settings(cls, section: dict[str, Any], thread_count: int) -> EnumerationConfig:
        """Build from the ``enumeration`` section of the settings file."""
        return cls(
            gamma_tol=float(section.get("gamma_tol", 1e-10)),
            rank_tol=float(section.get("rank_tol", 1e-10)),
            boundary_tol=float(section.get("boundary_tol", 1e-12)),
            thread_count=thread_count,
            debug_check=bool(section.get("debug_check", False)),
        )


@dataclass(frozen=True)
class GlobalRankInfo:
    """Rank of the augmented sample matrix and the subset size bound."""

    full_rank: int
    min_bound: int


@dataclass(frozen=True, eq=False)
class DiscrepancyReport:
    """Result of one enumeration run with provenance and the count ledger."""

    delta: float
    delta1: float
    delta0: float
    argmax_cap: Cap
    argmax_subset: tuple[int, ...]
    argmax_family: SubsetFamily
    n: int
    N: int
    full_rank: int
    min_bound: int
    subset_space: int
    subsets_enumerated: int
    subsets_pruned: int
    subsets_skipped_rank: int
    subsets_skipped_gamma: int
    subsets_skipped_degenerate: int
    phi1_count: int
    phi0_count: int
    argmax_empirical: float
    argmax_cap_measure: float
    wall_time: float
    thread_count: int
    config: EnumerationConfig

    def to_dict(self) -> dict[str, Any]:
        """Flat mapping with the report file keys."""
        return {
            "delta": self.delta,
            "delta1": self.delta1,
            "delta0": self.delta0,
            "argmax": {
                "w": self.argmax_cap.w.tolist(),
                "t": self.argmax_cap.t,
                "subset": list(self.argmax_subset),
                "family": self.argmax_family.value,
                "empirical_measure": self.argmax_empirical,
                "cap_measure": self.argmax_cap_measure,
            },
            "n": self.n,
            "N": self.N,
            "full_rank": self.full_rank,
            "min_bound": self.min_bound,
            "subset_space": self.subset_space,
            "subsets_enumerated": self.subsets_enumerated,
            "subsets_pruned": self.subsets_pruned,
            "subsets_skipped_rank": self.subsets_skipped_rank,
            "subsets_skipped_gamma": self.subsets_skipped_gamma,
            "subsets_skipped_degenerate": self.subsets_skipped_degenerate,
            "phi1_count": self.phi1_count,
            "phi0_count": self.phi0_count,
            "gamma_tol": self.config.gamma_tol,
            "rank_tol": self.config.rank_tol,
            "boundary_tol": self.config.boundary_tol,
            "threads": self.thread_count,
            "wall_time_seconds": self.wall_time,
        }


def global_rank_bound(ps: PointSet, rank_tol: float = 1e-10) -> GlobalRankInfo:
    """Rank of X~ = [X; -1^T] by column-pivoted QR, and min{n, rank X~}."""
    augmented = np.vstack([ps.points.T, -np.ones((1, ps.N))])
    r_factor, _ = scipy.linalg.qr(augmented, mode="r", pivoting=True, check_finite=False)
    diagonal = np.abs(np.diag(r_factor))
    full_rank = max(1, int(np.count_nonzero(diagonal > rank_tol * diagonal[0])))
    return GlobalRankInfo(full_rank=full_rank, min_bound=min(ps.n, full_rank))


def subset_space_size(count: int, min_bound: int) -> int:
    """Number of index sets of size 1..min_bound out of ``count`` points.

    Computed with Python integers, so the result is exact at any size.

    Raises:
        EnumerationError: If min_bound is outside [1, count]
    """
    if not 1 <= min_bound <= count:
        raise EnumerationError(
            f"min_bound must lie in [1, {count}], got {min_bound}",
            {"N": count, "min_bound": min_bound},
        )
    return sum(math.comb(count, size) for size in range(1, min_bound + 1))


@lru_cache(maxsize=4096)
def _tail_size(remaining: int, depth: int) -> int:
    # Extensions of a subset by 1..depth elements taken from `remaining` larger indices.
    return sum(math.comb(remaining, size) for size in range(1, depth + 1))


@dataclass
class _FamilyBest:
    value: float = 0.0
    subset: tuple[int, ...] | None = None
    negated: bool = False

    def key(self) -> tuple[float, tuple[int, ...], bool]:
        return (-self.value, self.subset or (), self.negated)

    def offer(self, value: float, subset: tuple[int, ...], negated: bool) -> None:
        if self.subset is None or (-value, subset, negated) < self.key():
            self.value = value
            self.subset = subset
            self.negated = negated

    def merge(self, other: _FamilyBest) -> None:
        if other.subset is not None:
            self.offer(other.value, other.subset, other.negated)


@dataclass
class _BlockResult:
    start: int
    stop: int
    phi1: _FamilyBest = field(default_factory=_FamilyBest)
    phi0: _FamilyBest = field(default_factory=_FamilyBest)
    visited: int = 0
    pruned: int = 0
    skipped_rank: int = 0
    skipped_gamma: int = 0
    skipped_degenerate: int = 0
    phi1_count: int = 0
    phi0_count: int = 0

    def merge(self, other: _BlockResult) -> None:
        self.phi1.merge(other.phi1)
        self.phi0.merge(other.phi0)
        self.visited += other.visited
        self.pruned += other.pruned
        self.skipped_rank += other.skipped_rank
        self.skipped_gamma += other.skipped_gamma
        self.skipped_degenerate += other.skipped_degenerate
        self.phi1_count += other.phi1_count
        self.phi0_count += other.phi0_count


class _BlockSearch:
    """Depth-first search over all subsets whose first index lies in one block."""

    def __init__(self, ps: PointSet, config: EnumerationConfig, min_bound: int) -> None:
        self.ps = ps
        self.gram = ps.gram
        self.config = config
        self.min_bound = min_bound
        self.measure = get_evaluator(ps.n)
        self.result = _BlockResult(0, 0)

    def run(self, start: int, stop: int) -> _BlockResult:
        self.result = _BlockResult(start, stop)
        self._expand(PrefixFactor.empty(), np.arange(start, stop))
        return self.result

    def _expand(self, prefix: PrefixFactor, candidates: NDArray[np.intp]) -> None:
        config = self.config
        batch = prefix.extend(self.gram, candidates, config.rank_tol)
        size = prefix.size + 1
        result = self.result
        result.visited += candidates.size

        dependent = np.flatnonzero(~batch.independent)
        result.skipped_rank += dependent.size
        depth = self.min_bound - size
        if depth > 0:
            for column in dependent:
                result.pruned += _tail_size(self.ps.N - 1 - int(candidates[column]), depth)

        gammas = batch.gamma
        independent = batch.independent
        with np.errstate(invalid="ignore"):
            phi1 = independent & (gammas < 1.0 - config.gamma_tol)
            near_one = independent & (np.abs(gammas - 1.0) <= config.gamma_tol)
        phi0 = near_one if size == self.min_bound else np.zeros_like(near_one)
        result.skipped_gamma += int(np.count_nonzero(independent & ~phi1 & ~phi0))

        phi1_columns = np.flatnonzero(phi1)
        if phi1_columns.size:
            result.phi1_count += phi1_columns.size
            self._evaluate_phi1(batch, phi1_columns)
        for column in np.flatnonzero(phi0):
            self._evaluate_phi0(prefix.indices + (int(candidates[column]),))

        if depth > 0:
            last_index = self.ps.N - 1
            for column in np.flatnonzero(independent):
                head = int(candidates[column])
                if head < last_index:
                    self._expand(batch.child(int(column)), np.arange(head + 1, self.ps.N))

    def _member_mask(self, batch: ExtensionBatch, columns: NDArray[np.intp]) -> NDArray[np.bool_]:
        mask = np.zeros((self.ps.N, columns.size), dtype=bool)
        if batch.prefix.size:
            mask[np.asarray(batch.prefix.indices), :] = True
        mask[batch.candidates[columns], np.arange(columns.size)] = True
        return mask

    def _evaluate_phi1(self, batch: ExtensionBatch, columns: NDArray[np.intp]) -> None:
        tol = self.config.boundary_tol
        count = self.ps.N
        gammas = batch.gamma[columns]
        t = np.minimum(np.sqrt((1.0 - gammas) / gammas), 1.0)
        scale = (1.0 + t * t) / t
        dots = batch.gram_solution_products(self.gram, columns) * scale[None, :]

        if self.config.debug_check:
            self._check_dots(batch, columns, scale, dots)

        members = self._member_mask(batch, columns)
        emp_pos = np.count_nonzero((dots >= t - tol) | members, axis=0) / count
        emp_neg = np.count_nonzero((dots <= t + tol) | members, axis=0) / count
        measure = self.measure.cap_measure(t)

        values = np.empty(2 * columns.size)
        values[0::2] = np.abs(emp_pos - measure)
        values[1::2] = np.abs(emp_neg - (1.0 - measure))
        best = int(np.argmax(values))
        column, negated = divmod(best, 2)
        subset = batch.prefix.indices + (int(batch.candidates[columns[column]]),)
        self.result.phi1.offer(float(values[best]), subset, bool(negated))

    def _evaluate_phi0(self, subset: tuple[int, ...]) -> None:
        try:
            w = phi0_kernel_direction(
                self.ps, subset, self.config.rank_tol, self.config.kernel_convention
            )
        except DegenerateSubsetError as e:
            logger.debug("degenerate phi0 subset skipped", indices=subset, error=str(e))
            self.result.skipped_degenerate += 1
            return

        self.result.phi0_count += 1
        tol = self.config.boundary_tol
        dots = self.ps.dots(w)
        members = np.zeros(self.ps.N, dtype=bool)
        members[list(subset)] = True
        emp_pos = np.count_nonzero((dots >= -tol) | members) / self.ps.N
        emp_neg = np.count_nonzero((dots <= tol) | members) / self.ps.N
        self.result.phi0.offer(abs(emp_pos - 0.5), subset, False)
        self.result.phi0.offer(abs(emp_neg - 0.5), subset, True)

    def _check_dots(
        self,
        batch: ExtensionBatch,
        columns: NDArray[np.intp],
        scale: FloatArray,
        dots: FloatArray,
    ) -> None:
        for j, column in enumerate(columns):
            child = batch.child(int(column))
            w = scale[j] * (self.ps.points[list(child.indices)].T @ child.y)
            deviation = float(np.max(np.abs(self.ps.dots(w) - dots[:, j])))
            if deviation > DEBUG_DOT_TOLERANCE:
                raise EnumerationError(
                    f"Gram-based inner products deviate by {deviation:.3e} for {child.indices}",
                    {"indices": child.indices, "deviation": deviation},
                )


def _search_block(
    points: FloatArray, config: EnumerationConfig, min_bound: int, start: int, stop: int
) -> _BlockResult:
    # Worker entry point; the points are already normalized.
    return _BlockSearch(PointSet(points), config, min_bound).run(start, stop)


def _partition(count: int, min_bound: int, blocks: int) -> list[tuple[int, int]]:
    """Contiguous first-index blocks of roughly equal subtree weight."""
    weights = [1 + _tail_size(count - 1 - i, min_bound - 1) for i in range(count)]
    target = sum(weights) / max(1, blocks)
    bounds: list[tuple[int, int]] = []
    start = 0
    accumulated = 0
    for i, weight in enumerate(weights):
        accumulated += weight
        if accumulated >= target and i + 1 < count:
            bounds.append((start, i + 1))
            start = i + 1
            accumulated = 0
    bounds.append((start, count))
    return bounds


def _run_blocks(
    ps: PointSet, config: EnumerationConfig, min_bound: int, total: int
) -> _BlockResult:
    blocks = _partition(ps.N, min_bound, min(ps.N, config.thread_count * BLOCKS_PER_WORKER))
    merged = _BlockResult(0, ps.N)
    done = 0

    def record(result: _BlockResult) -> None:
        nonlocal done
        merged.merge(result)
        done += result.visited + result.pruned
        logger.info(
            "enumeration progress",
            percent=round(100.0 * done / total, 1),
            block=(result.start, result.stop),
        )

    if config.thread_count == 1:
        for start, stop in blocks:
            record(_search_block(ps.points, config, min_bound, start, stop))
        return merged

    with ProcessPoolExecutor(max_workers=config.thread_count) as executor:
        futures = [
            executor.submit(_search_block, ps.points, config, min_bound, start, stop)
            for start, stop in blocks
        ]
        for future in as_completed(futures):
            record(future.result())
    return merged


def _argmax_cap(
    ps: PointSet, best: _FamilyBest, family: SubsetFamily, config: EnumerationConfig
) -> Cap:
    subset = best.subset or ()
    try:
        if family is SubsetFamily.PHI1:
            g = gamma(ps, subset, config.rank_tol)
            w, t = phi1_cap(ps, subset, g, config.gamma_tol, config.rank_tol)
            cap = Cap(w, min(t, 1.0))
        else:
            cap = Cap(phi0_kernel_direction(ps, subset, config.rank_tol, config.kernel_convention), 0.0)
    except (ContractViolation, DegenerateSubsetError) as e:
        raise EnumerationError(
            f"Cannot rebuild the maximizing cap of {subset}: {e}",
            {"subset": subset, "family": family.value},
        ) from e
    return cap.negated() if best.negated else cap


def enumerate_discrepancy(ps: PointSet, config: EnumerationConfig | None = None) -> DiscrepancyReport:
    """Exact spherical cap discrepancy of a sample as max{Delta1, Delta0}.

    Every index set I with 1 <= #I <= min{n, rank X~} is visited or pruned
    as a superset of an affinely dependent set; Phi1 sets contribute both
    (w_I, t_I) and (-w_I, -t_I), Phi0 sets both (w_I, 0) and (-w_I, 0).

    Raises:
        EnumerationError: If the debug self-check fails or the maximizing
            cap cannot be rebuilt
    """
    config = config or EnumerationConfig()
    started = time.perf_counter()

    rank_info = global_rank_bound(ps, config.rank_tol)
    total = subset_space_size(ps.N, rank_info.min_bound)
    logger.info(
        "enumeration started",
        n=ps.n,
        N=ps.N,
        min_bound=rank_info.min_bound,
        subset_space=total,
        threads=config.thread_count,
    )

    merged = _run_blocks(ps, config, rank_info.min_bound, total)

    if merged.visited + merged.pruned != total:
        raise EnumerationError(
            "Subset ledger does not balance",
            {"visited": merged.visited, "pruned": merged.pruned, "subset_space": total},
        )

    delta1 = merged.phi1.value if merged.phi1.subset is not None else 0.0
    delta0 = merged.phi0.value if merged.phi0.subset is not None else 0.0
    if merged.phi1.subset is None and merged.phi0.subset is None:
        raise EnumerationError("No candidate cap was produced", {"N": ps.N, "n": ps.n})

    if merged.phi0.subset is not None and (merged.phi1.subset is None or delta0 > delta1):
        best, family = merged.phi0, SubsetFamily.PHI0
    else:
        best, family = merged.phi1, SubsetFamily.PHI1
    cap = _argmax_cap(ps, best, family, config)

    wall_time = time.perf_counter() - started
    report = DiscrepancyReport(
        delta=max(delta1, delta0),
        delta1=delta1,
        delta0=delta0,
        argmax_cap=cap,
        argmax_subset=best.subset or (),
        argmax_family=family,
        n=ps.n,
        N=ps.N,
        full_rank=rank_info.full_rank,
        min_bound=rank_info.min_bound,
        subset_space=total,
        subsets_enumerated=merged.visited,
        subsets_pruned=merged.pruned,
        subsets_skipped_rank=merged.skipped_rank,
        subsets_skipped_gamma=merged.skipped_gamma,
        subsets_skipped_degenerate=merged.skipped_degenerate,
        phi1_count=merged.phi1_count,
        phi0_count=merged.phi0_count,
        argmax_empirical=empirical_measure(ps, cap, FEASIBILITY_TOLERANCE),
        argmax_cap_measure=get_evaluator(ps.n).cap_measure(cap.t),
        wall_time=wall_time,
        thread_count=config.thread_count,
        config=config,
    )
    logger.info(
        "enumeration finished",
        delta=report.delta,
        family=family.value,
        subset=report.argmax_subset,
        seconds=round(wall_time, 3),
    )
    return report
