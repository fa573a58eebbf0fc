"""
Core cap-measure evaluation for the cap_measure component.

The measure of the cap with threshold t on S^{n-1} is

    mu(t) = C_n * int_0^{arccos t} sin^{n-2}(tau) dtau          (t >= 0)
    mu(t) = 1 - C_n * int_0^{arccos(-t)} sin^{n-2}(tau) dtau    (t < 0)

with C_n = 1 / int_0^pi sin^{n-2}. The sine-power integral is evaluated with
the closed reduction formula

    I_m(theta) = -cos(theta) sin^{m-1}(theta) / m + (m - 1)/m * I_{m-2}(theta)

seeded by I_0 = theta and I_1 = 1 - cos(theta), so no quadrature error enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, overload

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

# Thresholds this close to +-1 come from rounding, not from the caller.
SNAP_TOLERANCE = 1e-14


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


def _sin_power_integral_array(m: int, theta: FloatArray) -> FloatArray:
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    if m % 2 == 0:
        value = theta.astype(np.float64, copy=True)
        k = 2
    else:
        value = 1.0 - cos_t
        k = 3
    while k <= m:
        value = (-cos_t * sin_t ** (k - 1) + (k - 1) * value) / k
        k += 2
    return value


def sin_power_integral(m: int, theta: float | FloatArray) -> Any:
    """Integral of sin^m over [0, theta].

    Args:
        m: Non-negative exponent
        theta: Upper limit in [0, pi] (scalar or array)

    Returns:
        The integral, scalar for scalar input

    Raises:
        DomainError: If m < 0 or theta lies outside [0, pi]
    """
    if m < 0:
        raise DomainError(f"Exponent must be non-negative, got {m}", {"m": m})

    theta_arr = np.asarray(theta, dtype=np.float64)
    if np.any(theta_arr < 0.0) or np.any(theta_arr > math.pi) or np.any(np.isnan(theta_arr)):
        raise DomainError(
            "Angle outside [0, pi]",
            {"m": m, "min": float(np.min(theta_arr)), "max": float(np.max(theta_arr))},
        )

    result = _sin_power_integral_array(m, np.atleast_1d(theta_arr))
    if theta_arr.ndim == 0:
        return float(result[0])
    return result.reshape(theta_arr.shape)


@lru_cache(maxsize=None)
def normalization_constant(n: int) -> float:
    """Return C_n = 1 / int_0^pi sin^{n-2}.

    Raises:
        DomainError: If n < 2
    """
    if n < 2:
        raise DomainError(f"Ambient dimension must be >= 2, got {n}", {"n": n})
    return 1.0 / sin_power_integral(n - 2, math.pi)


@dataclass(frozen=True)
class CapMeasureEvaluator:
    """Cap measure on S^{dimension-1} with the normalization precomputed.

    ``quad_tolerance`` only documents the accuracy target; the reduction
    formula is exact up to rounding.
    """

    dimension: int
    quad_tolerance: float = 1e-12
    normalization: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "normalization", normalization_constant(self.dimension))

    @overload
    def __call__(self, t: float) -> float: ...

    @overload
    def __call__(self, t: FloatArray) -> FloatArray: ...

    def __call__(self, t: Any) -> Any:
        return self.cap_measure(t)

    def sin_power_integral(self, theta: float | FloatArray) -> Any:
        """Integral of sin^{n-2} over [0, theta]."""
        return sin_power_integral(self.dimension - 2, theta)

    def cap_measure(self, t: float | FloatArray) -> Any:
        """Measure of a cap with threshold t.

        Raises:
            DomainError: If |t| > 1 beyond the snapping tolerance
        """
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(np.isnan(t_arr)) or np.any(np.abs(t_arr) > 1.0 + SNAP_TOLERANCE):
            raise DomainError(
                "Cap threshold outside [-1, 1]",
                {"dimension": self.dimension, "t": t_arr.tolist() if t_arr.size <= 8 else "array"},
            )

        flat = np.atleast_1d(t_arr).astype(np.float64, copy=True)
        flat[flat >= 1.0 - SNAP_TOLERANCE] = 1.0
        flat[flat <= -1.0 + SNAP_TOLERANCE] = -1.0

        magnitude = np.abs(flat)
        upper = self.normalization * _sin_power_integral_array(
            self.dimension - 2, np.arccos(magnitude)
        )
        # Small caps for t >= 0, complements of small caps for t < 0.
        result = np.where(flat >= 0.0, upper, 1.0 - upper)
        result[flat == 1.0] = 0.0
        result[flat == -1.0] = 1.0
        result[flat == 0.0] = 0.5
        np.clip(result, 0.0, 1.0, out=result)

        if t_arr.ndim == 0:
            return float(result[0])
        return result.reshape(t_arr.shape)


@lru_cache(maxsize=32)
def get_evaluator(n: int) -> CapMeasureEvaluator:
    """Shared evaluator per dimension (immutable, safe to share)."""
    return CapMeasureEvaluator(n)


def cap_measure(n: int, t: float | FloatArray) -> Any:
    """Measure of the cap {<w, x> >= t} on S^{n-1}.

    Raises:
        DomainError: If n < 2 or |t| > 1
    """
    return get_evaluator(n).cap_measure(t)
