from cap_discrepancy.discrepancy_core import core


import math

import numpy as np
import pytest

from cap_discrepancy.cap_measure import DomainError, cap_measure
from cap_discrepancy.discrepancy_core.core import (
    AttainedSide,
    Cap,
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


def random_points(rng: np.random.Generator, count: int, dim: int) -> PointSet:
    z = rng.standard_normal((count, dim))
    return PointSet.from_array(z / np.linalg.norm(z, axis=1, keepdims=True))


def clustered_triple(delta: float = 1e-3) -> PointSet:
    half = delta / 2.0
    return PointSet.from_array(
        [
            [1.0, 0.0, 0.0],
            [-math.cos(half), math.sin(half), 0.0],
            [-math.cos(half), -math.sin(half), 0.0],
        ]
    )


class TestPointSet:
    """Validation and derived data of samples."""

    @pytest.fixture
    def rng(self):
        return np.random.default_rng(20240501)

    def test_shape_properties(self, rng):
        ps = random_points(rng, 7, 4)
        assert ps.N == 7
        assert ps.n == 4
        assert len(ps) == 7

    def test_points_are_read_only(self, rng):
        ps = random_points(rng, 3, 3)
        with pytest.raises(ValueError):
            ps.points[0, 0] = 2.0

    def test_renormalizes_within_tolerance(self):
        ps = PointSet.from_array([[1.0 + 5e-10, 0.0], [0.0, 1.0]])
        assert np.allclose(np.linalg.norm(ps.points, axis=1), 1.0, atol=1e-14)

    def test_unit_rows_are_kept_bitwise(self, rng):
        ps = random_points(rng, 50, 5)
        again = PointSet.from_array(ps.points)
        assert np.array_equal(again.points, ps.points)

    def test_non_unit_points_list_offenders(self):
        with pytest.raises(PointSetError) as exc_info:
            PointSet.from_array([[1.0, 0.0], [0.0, 1.1], [0.5, 0.0]])
        offenders = exc_info.value.context["offenders"]
        assert [index for index, _ in offenders] == [1, 2]
        assert offenders[0][1] == pytest.approx(1.1)

    @pytest.mark.parametrize(
        "data",
        [
            [],
            [[1.0]],
            [1.0, 0.0],
            [[1.0, 0.0, float("nan")]],
        ],
    )
    def test_invalid_shapes(self, data):
        with pytest.raises(PointSetError):
            PointSet.from_array(data)

    def test_point_set_error_is_domain_error(self):
        assert issubclass(PointSetError, DomainError)

    def test_gram_matrix(self, rng):
        ps = random_points(rng, 6, 3)
        assert np.allclose(ps.gram, ps.points @ ps.points.T)
        assert np.allclose(np.diag(ps.gram), 1.0)


class TestCap:
    def test_rejects_non_unit_direction(self):
        with pytest.raises(DomainError):
            Cap(np.array([1.0, 1.0, 0.0]), 0.0)

    def test_rejects_threshold_outside_range(self):
        with pytest.raises(DomainError):
            Cap(np.array([1.0, 0.0]), 1.2)

    def test_negated(self):
        cap = Cap(np.array([0.0, 1.0, 0.0]), 0.25)
        reflected = cap.negated()
        assert np.array_equal(reflected.w, -cap.w)
        assert reflected.t == -0.25
        assert cap.to_dict() == {"w": [0.0, 1.0, 0.0], "t": 0.25}


class TestEmpiricalMeasure:
    """Closed-halfspace counting and the local discrepancy."""

    def test_boundary_point_is_inside(self):
        ps = PointSet.from_array([[1.0, 0.0], [0.0, 1.0]])
        cap = Cap(np.array([1.0, 0.0]), 0.0)
        # <w, x^2> == t exactly
        assert empirical_count(ps, cap) == 2
        assert empirical_measure(ps, cap) == 1.0

    def test_tolerance_widens_cap(self):
        ps = PointSet.from_array([[1.0, 0.0], [math.cos(1.0), math.sin(1.0)]])
        t = math.cos(1.0) + 1e-10
        cap = Cap(np.array([1.0, 0.0]), t)
        assert empirical_count(ps, cap) == 1
        assert empirical_count(ps, cap, tolerance=1e-9) == 2

    def test_dimension_mismatch(self):
        ps = PointSet.from_array([[1.0, 0.0, 0.0]])
        with pytest.raises(DomainError):
            empirical_measure(ps, Cap(np.array([1.0, 0.0]), 0.0))

    def test_local_discrepancy_single_point(self):
        ps = PointSet.from_array([[0.0, 0.0, 1.0]])
        cap = Cap(np.array([0.0, 0.0, 1.0]), 0.5)
        assert local_discrepancy(ps, cap) == pytest.approx(1.0 - 0.25)

    def test_reflection_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            ps = random_points(rng, 25, 3)
            w = rng.standard_normal(3)
            w /= np.linalg.norm(w)
            dots = ps.dots(w)
            t = float(dots[rng.integers(ps.N)])
            on_boundary = int(np.count_nonzero(dots == t))
            forward = empirical_count(ps, Cap(w, t))
            backward = empirical_count(ps, Cap(w, t).negated())
            assert forward + backward == ps.N + on_boundary


class TestDirectionalSupremum:
    """Exact supremum over thresholds for one direction."""

    def test_single_point_own_direction(self):
        ps = PointSet.from_array([[0.0, 0.0, 1.0]])
        result = directional_supremum(ps, [0.0, 0.0, 1.0])
        assert result.value == 1.0
        assert result.argmax_t == 1.0
        assert result.attained_side is AttainedSide.AT_THRESHOLD

    def test_single_point_opposite_direction(self):
        ps = PointSet.from_array([[0.0, 0.0, 1.0]])
        result = directional_supremum(ps, [0.0, 0.0, -1.0])
        assert result.value == 1.0
        assert result.argmax_t == -1.0
        assert result.attained_side is AttainedSide.LIMIT_FROM_ABOVE

    def test_dominates_threshold_scan(self):
        rng = np.random.default_rng(11)
        ps = random_points(rng, 30, 3)
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        result = directional_supremum(ps, w)
        scanned = max(local_discrepancy(ps, Cap(w, t)) for t in np.linspace(-1.0, 1.0, 4001))
        assert result.value >= scanned - 1e-15

    def test_equals_best_candidate(self):
        rng = np.random.default_rng(12)
        ps = random_points(rng, 20, 4)
        w = rng.standard_normal(4)
        w /= np.linalg.norm(w)
        dots = ps.dots(w)
        at_threshold = [
            abs(np.count_nonzero(dots >= d) / ps.N - cap_measure(4, d)) for d in dots
        ]
        from_above = [abs(np.count_nonzero(dots > d) / ps.N - cap_measure(4, d)) for d in dots]
        expected = max(at_threshold + from_above)
        assert directional_supremum(ps, w).value == pytest.approx(expected, abs=1e-15)

    def test_direction_is_normalized(self):
        ps = PointSet.from_array([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(DomainError):
            directional_supremum(ps, [2.0, 0.0])

    def test_batched_matches_single(self):
        rng = np.random.default_rng(13)
        ps = random_points(rng, 15, 3)
        directions = rng.standard_normal((40, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        batched = directional_suprema(ps, directions, chunk_size=7)
        single = [directional_supremum(ps, w).value for w in directions]
        assert np.allclose(batched, single, rtol=0.0, atol=1e-14)

    def test_to_dict(self):
        ps = PointSet.from_array([[1.0, 0.0]])
        assert directional_supremum(ps, [1.0, 0.0]).to_dict()["attained_side"] == "at-threshold"


class TestLowerBound:
    """Lower estimate over the sample directions."""

    def test_single_point(self):
        assert lower_bound(PointSet.from_array([[0.6, 0.8]])) == 1.0

    def test_clustered_equatorial_triple(self):
        estimate = lower_bound(clustered_triple())
        assert 0.5 <= estimate <= 2.0 / 3.0 + 1e-12

    def test_details_follow_sample_order(self):
        rng = np.random.default_rng(5)
        ps = random_points(rng, 9, 3)
        details = lower_bound_details(ps, chunk_size=4)
        assert len(details) == ps.N
        for i, entry in enumerate(details):
            assert entry.value == pytest.approx(directional_supremum(ps, ps.points[i]).value, abs=1e-15)
        assert lower_bound(ps) == max(entry.value for entry in details)

    def test_bounded_by_one(self):
        rng = np.random.default_rng(6)
        estimate = lower_bound(random_points(rng, 40, 5))
        assert 0.0 < estimate <= 1.0

    def test_module_tolerances(self):
        assert core.POINT_NORM_TOLERANCE == 1e-9
