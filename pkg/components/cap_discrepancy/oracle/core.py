"""
Core grid oracle for the oracle component.

The local discrepancy is discontinuous in (w, t), so a grid only ever gives a
lower bound. The threshold component is handled exactly per direction, which
confines the grid error to the direction. The acceptance tolerance is an
empirical calibration, ``tolerance_per_resolution * resolution``, not a
proven bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np
from numpy.typing import NDArray

from cap_discrepancy.discrepancy_core import PointSet, directional_suprema
from cap_discrepancy.enumerator import EnumerationConfig, enumerate_discrepancy
from cap_discrepancy.unified_logger import get_logger

FloatArray = NDArray[np.float64]

SUPPORTED_DIMENSIONS = (2, 3)
MAX_ORACLE_POINTS = 24
BOUNDARY_TOLERANCE = 1e-8
MEASURE_TOLERANCE = 1e-10
# Latitude rows per work unit on S^2.
LATITUDE_BAND = 32

logger = get_logger(__name__)


class OracleError(Exception):
    """Exception raised for unsupported oracle inputs."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


class OracleDimensionError(OracleError):
    """Grid oracle asked for a sphere it does not cover."""


@dataclass(frozen=True)
class GridSpec:
    """Direction grid with angular step ``resolution`` on S^{dimension-1}.

    Angles are integer multiples of the resolution, so halving the
    resolution refines the grid.
    """

    resolution: float = 1e-3
    dimension: int = 3
    tolerance_per_resolution: float = 5.0

    def __post_init__(self) -> None:
        if not self.resolution > 0:
            raise OracleError("Grid resolution must be positive", {"resolution": self.resolution})
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise OracleDimensionError(
                f"Grid oracle supports n in {SUPPORTED_DIMENSIONS}, got {self.dimension}",
                {"dimension": self.dimension},
            )

    @property
    def tolerance(self) -> float:
        """Accepted gap between the exact discrepancy and the grid bound."""
        return self.tolerance_per_resolution * self.resolution

    @property
    def longitudes(self) -> FloatArray:
        return np.arange(math.ceil(2.0 * math.pi / self.resolution)) * self.resolution

    @property
    def latitudes(self) -> FloatArray:
        # Polar angles j * resolution strictly inside (0, pi); poles are added separately.
        steps = np.arange(1, math.ceil(math.pi / self.resolution)) * self.resolution
        return steps[steps < math.pi]


def _band_directions(polar: FloatArray, longitudes: FloatArray) -> FloatArray:
    sin_p = np.sin(polar)[:, None]
    cos_p = np.cos(polar)[:, None]
    x = sin_p * np.cos(longitudes)[None, :]
    y = sin_p * np.sin(longitudes)[None, :]
    z = np.broadcast_to(cos_p, x.shape)
    return np.stack((x, y, z), axis=-1).reshape(-1, 3)


def grid_directions(grid: GridSpec) -> Iterator[FloatArray]:
    """Yield the grid directions in blocks of rows."""
    longitudes = grid.longitudes
    if grid.dimension == 2:
        yield np.column_stack((np.cos(longitudes), np.sin(longitudes)))
        return
    yield np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    latitudes = grid.latitudes
    for start in range(0, latitudes.size, LATITUDE_BAND):
        yield _band_directions(latitudes[start : start + LATITUDE_BAND], longitudes)


def _band_maximum(points: FloatArray, grid: GridSpec, start: int, stop: int) -> float:
    ps = PointSet(points)
    latitudes = grid.latitudes[start:stop]
    return float(np.max(directional_suprema(ps, _band_directions(latitudes, grid.longitudes))))


def grid_lower_bound(ps: PointSet, grid: GridSpec, workers: int = 1) -> float:
    """Maximum directional supremum over the grid, a lower bound on the discrepancy.

    Raises:
        OracleError: If the point set dimension does not match the grid
    """
    if ps.n != grid.dimension:
        raise OracleDimensionError(
            f"Point set dimension {ps.n} does not match grid dimension {grid.dimension}",
            {"n": ps.n, "grid_dimension": grid.dimension},
        )

    if workers <= 1 or grid.dimension == 2:
        return max(float(np.max(directional_suprema(ps, block))) for block in grid_directions(grid))

    best = float(np.max(directional_suprema(ps, np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]))))
    count = grid.latitudes.size
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [
            executor.submit(_band_maximum, ps.points, grid, start, min(start + LATITUDE_BAND, count))
            for start in range(0, count, LATITUDE_BAND)
        ]
        for future in futures:
            best = max(best, future.result())
    return best


@dataclass(frozen=True)
class Verdict:
    """Outcome of a cross-check with the quantities it was decided on."""

    passed: bool
    delta: float
    grid_bound: float
    gap: float
    tolerance: float
    boundary_distance: float
    empirical: float
    cap_measure: float
    violations: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "delta": self.delta,
            "grid_bound": self.grid_bound,
            "gap": self.gap,
            "tolerance": self.tolerance,
            "boundary_distance": self.boundary_distance,
            "empirical": self.empirical,
            "cap_measure": self.cap_measure,
            "violations": self.violations,
        }


def cross_check(
    ps: PointSet,
    grid: GridSpec,
    config: EnumerationConfig | None = None,
    workers: int = 1,
    max_points: int = MAX_ORACLE_POINTS,
) -> Verdict:
    """Compare the enumerated discrepancy against the grid bound.

    Passes iff the discrepancy is not below the grid bound, the gap is within
    the grid tolerance, and the maximizing cap has a sample point on its
    boundary with empirical measure not below its cap measure.

    Raises:
        OracleError: If the dimension is unsupported or N exceeds max_points
    """
    if ps.N > max_points:
        raise OracleError(
            f"Oracle is limited to {max_points} points, got {ps.N}",
            {"N": ps.N, "max_points": max_points},
        )

    report = enumerate_discrepancy(ps, config)
    bound = grid_lower_bound(ps, grid, workers)
    gap = report.delta - bound
    cap = report.argmax_cap
    boundary_distance = float(np.min(np.abs(ps.dots(cap.w) - cap.t)))

    violations: dict[str, Any] = {}
    if gap < -MEASURE_TOLERANCE:
        violations["below_grid_bound"] = {"delta": report.delta, "grid_bound": bound}
    if abs(gap) > grid.tolerance:
        violations["gap_exceeds_tolerance"] = {"gap": gap, "tolerance": grid.tolerance}
    if boundary_distance > BOUNDARY_TOLERANCE:
        violations["no_boundary_point"] = {"distance": boundary_distance}
    if report.argmax_empirical < report.argmax_cap_measure - MEASURE_TOLERANCE:
        violations["empirical_below_cap"] = {
            "empirical": report.argmax_empirical,
            "cap_measure": report.argmax_cap_measure,
        }

    verdict = Verdict(
        passed=not violations,
        delta=report.delta,
        grid_bound=bound,
        gap=gap,
        tolerance=grid.tolerance,
        boundary_distance=boundary_distance,
        empirical=report.argmax_empirical,
        cap_measure=report.argmax_cap_measure,
        violations=violations,
    )
    logger.info("cross check finished", passed=verdict.passed, delta=report.delta, grid_bound=bound)
    return verdict
