from cap_discrepancy.cap_measure import core


import math

import numpy as np
import pytest
from scipy import integrate

from cap_discrepancy.cap_measure.core import (
    CapMeasureEvaluator,
    DomainError,
    cap_measure,
    get_evaluator,
    normalization_constant,
    sin_power_integral,
)


def _quad_cap_measure(n: int, t: float) -> float:
    """Reference value by adaptive quadrature of sin^{n-2} over [0, arccos t]."""
    upper, _ = integrate.quad(lambda s: math.sin(s) ** (n - 2), 0.0, math.acos(t), epsabs=1e-14)
    total, _ = integrate.quad(lambda s: math.sin(s) ** (n - 2), 0.0, math.pi, epsabs=1e-14)
    return upper / total


class TestSinPowerIntegral:
    """Closed-form sine-power integrals."""

    @pytest.mark.parametrize("m", [0, 1, 2, 3, 4, 5, 8])
    def test_matches_quadrature(self, m):
        for theta in (0.0, 0.3, 1.0, math.pi / 2, 2.5, math.pi):
            expected, _ = integrate.quad(lambda s: math.sin(s) ** m, 0.0, theta, epsabs=1e-14)
            assert sin_power_integral(m, theta) == pytest.approx(expected, abs=1e-12)

    def test_array_input_keeps_shape(self):
        theta = np.linspace(0.0, math.pi, 12).reshape(3, 4)
        result = sin_power_integral(2, theta)
        assert result.shape == (3, 4)
        assert result[0, 0] == 0.0

    def test_scalar_input_returns_float(self):
        assert isinstance(sin_power_integral(3, 1.0), float)

    @pytest.mark.parametrize("theta", [-0.1, math.pi + 1e-6, float("nan")])
    def test_angle_outside_domain(self, theta):
        with pytest.raises(DomainError):
            sin_power_integral(2, theta)

    def test_negative_exponent(self):
        with pytest.raises(DomainError) as exc_info:
            sin_power_integral(-1, 1.0)
        assert exc_info.value.context["m"] == -1


class TestNormalizationConstant:
    def test_known_values(self):
        assert normalization_constant(2) == pytest.approx(1.0 / math.pi)
        assert normalization_constant(3) == pytest.approx(0.5)
        assert normalization_constant(4) == pytest.approx(2.0 / math.pi)

    def test_dimension_below_two(self):
        with pytest.raises(DomainError):
            normalization_constant(1)


class TestCapMeasure:
    """Measure of {<w, x> >= t} on S^{n-1}."""

    def test_circle_is_arc_length(self):
        for t in np.linspace(-1.0, 1.0, 41):
            assert cap_measure(2, t) == pytest.approx(math.acos(t) / math.pi, abs=1e-14)

    def test_two_sphere_is_linear(self):
        # Archimedes: caps on S^2 have measure (1 - t) / 2.
        for t in np.linspace(-1.0, 1.0, 41):
            assert cap_measure(3, t) == pytest.approx((1.0 - t) / 2.0, abs=1e-14)

    @pytest.mark.parametrize("n", [4, 5, 6, 7, 10])
    def test_matches_quadrature_oracle(self, n):
        for t in (-0.95, -0.5, -0.1, 0.2, 0.7, 0.99):
            assert cap_measure(n, t) == pytest.approx(_quad_cap_measure(n, t), abs=1e-10)

    @pytest.mark.parametrize("n", [2, 3, 4, 9])
    def test_special_thresholds(self, n):
        assert cap_measure(n, 1.0) == 0.0
        assert cap_measure(n, -1.0) == 1.0
        assert cap_measure(n, 0.0) == 0.5

    def test_rounding_above_one_is_snapped(self):
        assert cap_measure(3, 1.0 + 5e-15) == 0.0
        assert cap_measure(3, -1.0 - 5e-15) == 1.0

    @pytest.mark.parametrize("t", [1.5, -1.0001, float("nan")])
    def test_threshold_outside_domain(self, t):
        with pytest.raises(DomainError):
            cap_measure(3, t)

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_complement_symmetry(self, n):
        t = np.linspace(-1.0, 1.0, 101)
        assert np.allclose(cap_measure(n, t) + cap_measure(n, -t), 1.0, atol=1e-13)

    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_non_increasing_in_threshold(self, n):
        values = cap_measure(n, np.linspace(-1.0, 1.0, 2001))
        assert np.all(np.diff(values) <= 1e-15)
        assert np.all((values >= 0.0) & (values <= 1.0))


class TestCapMeasureEvaluator:
    def test_callable_matches_function(self):
        evaluator = CapMeasureEvaluator(5)
        assert evaluator(0.3) == cap_measure(5, 0.3)
        assert evaluator.normalization == normalization_constant(5)

    def test_evaluator_is_shared(self):
        assert get_evaluator(4) is get_evaluator(4)

    def test_sin_power_integral_uses_dimension(self):
        evaluator = CapMeasureEvaluator(4)
        assert evaluator.sin_power_integral(math.pi) == pytest.approx(math.pi / 2)

    def test_invalid_dimension(self):
        with pytest.raises(DomainError):
            CapMeasureEvaluator(1)

    def test_module_exposes_core(self):
        assert core.SNAP_TOLERANCE == 1e-14
