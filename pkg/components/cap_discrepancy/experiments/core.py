"""
Core experiment harness for the experiments component.

Each (scheme, n, N, seed) cell draws a sample, computes the exact
discrepancy and the lower estimate, and records the ratio between them.
Cells whose projected enumeration time exceeds the budget are kept as
skipped rows so the table shape never depends on the machine.
"""

from __future__ import annotations

import math
import time
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from cap_discrepancy.discrepancy_core import lower_bound
from cap_discrepancy.enumerator import EnumerationConfig, enumerate_discrepancy, subset_space_size
from cap_discrepancy.samplers import SCHEMES, SamplerSpec, UnsupportedDimensionError, sample
from cap_discrepancy.unified_logger import get_logger

EXPERIMENT_COLUMNS = (
    "scheme",
    "n",
    "N",
    "seed",
    "delta",
    "delta_tilde",
    "ratio",
    "wall_time_seconds",
    "skipped",
)
LOGLOG_COLUMNS = ("scheme", "n", "N", "seed", "log10_N", "log10_delta")
SLOPE_COLUMNS = ("scheme", "n", "slope", "intercept", "points")
RATIO_COLUMNS = ("scheme", "n", "mean_ratio", "rel_std_ratio", "mean_gap", "rows")
TIMING_COLUMNS = ("n", "N", "subset_space", "seconds", "skipped")

# Single-worker enumeration rate on a desktop core; machine-dependent.
DEFAULT_SECONDS_PER_SUBSET = 1e-5
PILOT_SUBSETS = 20_000

logger = get_logger(__name__)


class ExperimentError(Exception):
    """Exception raised for invalid experiment plans."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


def parse_sizes(text: str) -> list[int]:
    """Parse ``start:stop:step`` (stop inclusive) or a comma list of sizes.

    Raises:
        ExperimentError: If the text is malformed or yields no positive size
    """
    try:
        if ":" in text:
            parts = [int(part) for part in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError(text)
            start, stop, step = parts
            sizes = list(range(start, stop + 1, step))
        else:
            sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ExperimentError(f"Invalid sizes {text!r}; expected start:stop:step", {"sizes": text}) from e

    if not sizes or min(sizes) < 1:
        raise ExperimentError(f"Sizes {text!r} must be positive and non-empty", {"sizes": text})
    return sizes


def parse_seeds(text: str) -> list[int]:
    """Parse a comma list of seeds (``0,1,2``) or a ``start:stop`` range."""
    try:
        if ":" in text:
            start, stop = (int(part) for part in text.split(":"))
            seeds = list(range(start, stop + 1))
        else:
            seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ExperimentError(f"Invalid seeds {text!r}", {"seeds": text}) from e

    if not seeds or min(seeds) < 0:
        raise ExperimentError(f"Seeds {text!r} must be non-negative and non-empty", {"seeds": text})
    return seeds


def projected_seconds(count: int, dim: int, seconds_per_subset: float, threads: int = 1) -> float:
    """Upper estimate of enumeration time from the subset-space size."""
    bound = max(1, min(dim, count))
    return subset_space_size(count, bound) * seconds_per_subset / max(1, threads)


def calibrate_seconds_per_subset(
    dim: int,
    enumeration: EnumerationConfig | None = None,
    seed: int = 0,
) -> float:
    """Measure the single-worker enumeration rate with a short pilot run.

    The pilot is the smallest gauss-mc sample on S^(dim-1) whose subset
    space reaches PILOT_SUBSETS.
    """
    enumeration = replace(enumeration or EnumerationConfig(), thread_count=1)
    count = dim + 1
    while subset_space_size(count, min(dim, count)) < PILOT_SUBSETS:
        count += 1

    points = sample(SamplerSpec("gauss-mc", dim, count, seed))
    report = enumerate_discrepancy(points, enumeration)
    rate = max(report.wall_time, 1e-9) / report.subset_space
    logger.info(
        "enumeration rate calibrated",
        n=dim,
        N=count,
        subsets=report.subset_space,
        seconds_per_subset=rate,
    )
    return rate


@dataclass(frozen=True)
class ExperimentRow:
    """One (scheme, n, N, seed) cell of an experiment table."""

    scheme: str
    n: int
    N: int
    seed: int
    delta: float | None
    delta_tilde: float | None
    ratio: float | None
    wall_time_seconds: float | None
    skipped: bool = False

    def as_tuple(self) -> tuple[Any, ...]:
        return (
            self.scheme,
            self.n,
            self.N,
            self.seed,
            "" if self.delta is None else self.delta,
            "" if self.delta_tilde is None else self.delta_tilde,
            "" if self.ratio is None else self.ratio,
            "" if self.wall_time_seconds is None else self.wall_time_seconds,
            int(self.skipped),
        )


@dataclass(frozen=True)
class ExperimentPlan:
    """Cells to run and the runtime envelope they must fit in.

    ``schemes`` may contain ``"all"``, which expands to every scheme that
    supports the requested dimension.
    """

    schemes: Sequence[str]
    dims: Sequence[int]
    sizes: Sequence[int]
    seeds: Sequence[int] = (0,)
    budget_seconds: float = 600.0
    seconds_per_subset: float = DEFAULT_SECONDS_PER_SUBSET
    desk_scale_subsets: float = 2e8
    enumeration: EnumerationConfig = field(default_factory=EnumerationConfig)

    def cells(self) -> list[tuple[str, int, int, int]]:
        """Expanded (scheme, n, N, seed) cells in output order.

        Raises:
            UnsupportedDimensionError: If an explicitly named scheme cannot
                sample a requested dimension
        """
        expand_all = "all" in self.schemes
        named = SCHEMES if expand_all else tuple(self.schemes)
        result = []
        for scheme in named:
            if scheme not in SCHEMES:
                raise ExperimentError(f"Unknown scheme: {scheme}", {"schemes": SCHEMES})
            for dim in self.dims:
                try:
                    SamplerSpec(scheme, dim, 1)
                except UnsupportedDimensionError:
                    if not expand_all:
                        raise
                    logger.warning("scheme skipped for dimension", scheme=scheme, n=dim)
                    continue
                result.extend((scheme, dim, count, seed) for count in self.sizes for seed in self.seeds)
        return sorted(result, key=lambda cell: (cell[0], cell[2], cell[1], cell[3]))


def _run_cell(plan: ExperimentPlan, scheme: str, dim: int, count: int, seed: int) -> ExperimentRow:
    points = sample(SamplerSpec(scheme, dim, count, seed))
    started = time.perf_counter()
    report = enumerate_discrepancy(points, plan.enumeration)
    estimate = lower_bound(points)
    elapsed = time.perf_counter() - started
    return ExperimentRow(
        scheme=scheme,
        n=dim,
        N=count,
        seed=seed,
        delta=report.delta,
        delta_tilde=estimate,
        ratio=estimate / report.delta,
        wall_time_seconds=elapsed,
    )


def run_experiment(plan: ExperimentPlan) -> list[ExperimentRow]:
    """Run every cell of the plan, marking over-budget cells as skipped.

    Rows are ordered by (scheme, N), then n and seed.
    """
    rows = []
    cells = plan.cells()
    threads = plan.enumeration.thread_count
    for position, (scheme, dim, count, seed) in enumerate(cells, start=1):
        projected = projected_seconds(count, dim, plan.seconds_per_subset, threads)
        if projected > plan.budget_seconds:
            logger.warning(
                "cell over budget, skipped",
                scheme=scheme,
                n=dim,
                N=count,
                projected_seconds=round(projected, 1),
                budget_seconds=plan.budget_seconds,
            )
            rows.append(ExperimentRow(scheme, dim, count, seed, None, None, None, None, skipped=True))
            continue
        if subset_space_size(count, max(1, min(dim, count))) > plan.desk_scale_subsets:
            logger.warning("cell above desk scale", scheme=scheme, n=dim, N=count)

        row = _run_cell(plan, scheme, dim, count, seed)
        rows.append(row)
        logger.info(
            "experiment row",
            progress=f"{100 * position // len(cells)}%",
            scheme=scheme,
            n=dim,
            N=count,
            seed=seed,
            delta=row.delta,
            ratio=row.ratio,
        )
    return rows


def dimension_study(
    dims: Sequence[int],
    sizes: Sequence[int],
    seeds: Sequence[int] = (0,),
    budget_seconds: float = 600.0,
    enumeration: EnumerationConfig | None = None,
) -> list[ExperimentRow]:
    """Ratio of the lower estimate to the exact value across dimensions.

    Samples with gauss-mc, which is defined for every n >= 2.
    """
    plan = ExperimentPlan(
        schemes=("gauss-mc",),
        dims=tuple(dims),
        sizes=tuple(sizes),
        seeds=tuple(seeds),
        budget_seconds=budget_seconds,
        enumeration=enumeration or EnumerationConfig(),
    )
    return run_experiment(plan)


@dataclass(frozen=True)
class SlopeFit:
    scheme: str
    n: int
    slope: float
    intercept: float
    points: int

    def as_tuple(self) -> tuple[Any, ...]:
        return (self.scheme, self.n, self.slope, self.intercept, self.points)


def _completed(rows: Iterable[ExperimentRow]) -> list[ExperimentRow]:
    return [row for row in rows if not row.skipped and row.delta is not None and row.delta > 0]


def loglog_rows(rows: Iterable[ExperimentRow]) -> list[tuple[Any, ...]]:
    """Companion rows of log10 N against log10 Delta for slope fitting."""
    return [
        (row.scheme, row.n, row.N, row.seed, math.log10(row.N), math.log10(row.delta))
        for row in _completed(rows)
        if row.delta is not None
    ]


def loglog_slope(rows: Iterable[ExperimentRow]) -> list[SlopeFit]:
    """Least-squares slope of log10 Delta against log10 N per (scheme, n).

    Groups with fewer than two distinct sizes are left out.
    """
    groups: dict[tuple[str, int], list[ExperimentRow]] = defaultdict(list)
    for row in _completed(rows):
        groups[(row.scheme, row.n)].append(row)

    fits = []
    for (scheme, dim), members in sorted(groups.items()):
        if len({row.N for row in members}) < 2:
            continue
        x = np.log10([row.N for row in members])
        y = np.log10([row.delta for row in members])
        slope, intercept = np.polyfit(x, y, 1)
        fits.append(SlopeFit(scheme, dim, float(slope), float(intercept), len(members)))
    return fits


@dataclass(frozen=True)
class RatioSummary:
    """Mean and relative spread of the lower-estimate ratio for one (scheme, n)."""

    scheme: str
    n: int
    mean_ratio: float
    rel_std_ratio: float
    mean_gap: float
    rows: int

    def as_tuple(self) -> tuple[Any, ...]:
        return (self.scheme, self.n, self.mean_ratio, self.rel_std_ratio, self.mean_gap, self.rows)


def ratio_summary(rows: Iterable[ExperimentRow]) -> list[RatioSummary]:
    groups: dict[tuple[str, int], list[ExperimentRow]] = defaultdict(list)
    for row in _completed(rows):
        groups[(row.scheme, row.n)].append(row)

    summaries = []
    for (scheme, dim), members in sorted(groups.items()):
        ratios = np.array([row.ratio for row in members], dtype=np.float64)
        gaps = np.array([row.delta - row.delta_tilde for row in members], dtype=np.float64)  # type: ignore[operator]
        mean = float(ratios.mean())
        spread = float(ratios.std() / mean) if mean > 0 else 0.0
        summaries.append(RatioSummary(scheme, dim, mean, spread, float(gaps.mean()), len(members)))
    return summaries


@dataclass(frozen=True)
class TimingRow:
    n: int
    N: int
    subset_space: int
    seconds: float | None
    skipped: bool

    def as_tuple(self) -> tuple[Any, ...]:
        return (self.n, self.N, self.subset_space, "" if self.seconds is None else self.seconds, int(self.skipped))


def timing_table(
    dims: Sequence[int],
    sizes: Sequence[int],
    budget_seconds: float,
    enumeration: EnumerationConfig | None = None,
    seconds_per_subset: float = DEFAULT_SECONDS_PER_SUBSET,
    seed: int = 0,
) -> list[TimingRow]:
    """Wall-clock enumeration time on gauss-mc samples for each (n, N).

    Cells projected to exceed the budget are reported as skipped.
    """
    enumeration = enumeration or EnumerationConfig()
    rows = []
    for dim in dims:
        for count in sizes:
            space = subset_space_size(count, max(1, min(dim, count)))
            if projected_seconds(count, dim, seconds_per_subset, enumeration.thread_count) > budget_seconds:
                rows.append(TimingRow(dim, count, space, None, True))
                logger.warning("timing cell over budget, skipped", n=dim, N=count)
                continue
            points = sample(SamplerSpec("gauss-mc", dim, count, seed))
            report = enumerate_discrepancy(points, enumeration)
            rows.append(TimingRow(dim, count, space, report.wall_time, False))
            logger.info("timing cell", n=dim, N=count, seconds=round(report.wall_time, 3))
    return rows

