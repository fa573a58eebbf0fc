"""
Core sampling schemes for the samplers component.

Uniform inputs come either from numpy's PCG64 generator (MC) or from the
unscrambled Sobol' sequence with Joe-Kuo direction numbers as shipped by
scipy (QMC). Gaussian coordinates use the inverse normal CDF rather than
Box-Muller so that low-discrepancy structure carries over coordinate-wise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import ndtri
from scipy.stats import qmc

from cap_discrepancy.discrepancy_core import PointSet
from cap_discrepancy.unified_logger import get_logger

FloatArray = NDArray[np.float64]
Scheme = Literal["gauss-mc", "gauss-sobol", "lambert-mc", "lambert-sobol"]

SCHEMES: tuple[str, ...] = ("gauss-mc", "gauss-sobol", "lambert-mc", "lambert-sobol")
MAX_SOBOL_DIM = 8
MC_GENERATOR = "numpy.PCG64"
# Zero-norm Gaussian vectors are redrawn at most this many times per point.
MAX_REDRAWS = 64

logger = get_logger(__name__)


class SamplerError(Exception):
    """Exception raised for sampling failures."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


class ZeroVectorError(SamplerError):
    """Gaussian transform produced the zero vector; advance and redraw."""


class UnsupportedDimensionError(SamplerError):
    """Scheme does not support the requested dimension."""


@dataclass(frozen=True)
class SamplerSpec:
    """Scheme, dimension, count and seed (MC) or skip offset (QMC)."""

    scheme: Scheme
    dim: int
    count: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise SamplerError(f"Unknown scheme: {self.scheme}", {"schemes": SCHEMES})
        if self.dim < 2:
            raise UnsupportedDimensionError(f"Dimension must be >= 2, got {self.dim}", {"dim": self.dim})
        if self.count < 1:
            raise SamplerError(f"Count must be >= 1, got {self.count}", {"count": self.count})
        if self.seed < 0 or self.seed >= 2**64:
            raise SamplerError("Seed must be an unsigned 64-bit integer", {"seed": self.seed})
        if self.scheme.startswith("lambert") and self.dim != 3:
            raise UnsupportedDimensionError(
                f"Lambert schemes map to S^2 only (dim 3), got dim {self.dim}",
                {"scheme": self.scheme, "dim": self.dim},
            )
        if self.scheme == "gauss-sobol" and self.dim > MAX_SOBOL_DIM:
            raise UnsupportedDimensionError(
                f"Sobol' sampling supports dim <= {MAX_SOBOL_DIM}, got {self.dim}",
                {"dim": self.dim},
            )

    @property
    def is_qmc(self) -> bool:
        return self.scheme.endswith("sobol")


def gaussian_point(n: int, uniform_inputs: ArrayLike) -> FloatArray:
    """Map n uniforms in (0, 1) to a unit vector through the inverse normal CDF.

    Raises:
        SamplerError: If an input lies outside the open unit interval
        ZeroVectorError: If every coordinate maps to zero
    """
    u = np.asarray(uniform_inputs, dtype=np.float64)
    if u.shape != (n,):
        raise SamplerError(f"Expected {n} uniform inputs, got shape {u.shape}", {"n": n})
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise SamplerError("Uniform inputs must lie strictly inside (0, 1)", {"inputs": u.tolist()})
    z = ndtri(u)
    norm = float(np.linalg.norm(z))
    if norm == 0.0:
        raise ZeroVectorError("Inverse CDF produced the zero vector", {"inputs": u.tolist()})
    return z / norm


def sobol_sequence(dim: int, count: int, skip: int = 0) -> FloatArray:
    """Points skip+1 ... skip+count of the unscrambled Sobol' sequence.

    Index 0 (the origin) is never returned.

    Raises:
        UnsupportedDimensionError: If dim is outside 1..MAX_SOBOL_DIM
    """
    if not 1 <= dim <= MAX_SOBOL_DIM:
        raise UnsupportedDimensionError(
            f"Sobol' dimension must lie in [1, {MAX_SOBOL_DIM}], got {dim}", {"dim": dim}
        )
    if count < 0 or skip < 0:
        raise SamplerError("count and skip must be non-negative", {"count": count, "skip": skip})

    engine = qmc.Sobol(d=dim, scramble=False)
    engine.fast_forward(skip + 1)
    with warnings.catch_warnings():
        # Balance properties for non-powers of two are not required here.
        warnings.simplefilter("ignore", category=UserWarning)
        return engine.random(count)


def lambert_point(u: float, v: float) -> FloatArray:
    """Lambert cylindrical equal-area map (u, v) in [0,1)^2 -> S^2.

    Raises:
        SamplerError: If an input lies outside [0, 1)
    """
    if not (0.0 <= u < 1.0 and 0.0 <= v < 1.0):
        raise SamplerError("Lambert inputs must lie in [0, 1)", {"u": u, "v": v})
    return _lambert_map(np.array([[u, v]]))[0]


def _lambert_map(uv: FloatArray) -> FloatArray:
    z = 2.0 * uv[:, 1] - 1.0
    phi = 2.0 * math.pi * uv[:, 0]
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack((radius * np.cos(phi), radius * np.sin(phi), z))


def _gaussian_rows(uniforms: FloatArray, redraw: Any) -> FloatArray:
    z = ndtri(uniforms)
    norms = np.linalg.norm(z, axis=1)
    for row in np.flatnonzero(norms == 0.0):
        for _ in range(MAX_REDRAWS):
            logger.debug("zero gaussian vector redrawn", row=int(row))
            z[row] = ndtri(redraw())
            norms[row] = np.linalg.norm(z[row])
            if norms[row] > 0.0:
                break
        else:
            raise ZeroVectorError("Could not draw a nonzero Gaussian vector", {"row": int(row)})
    return z / norms[:, None]


def _open_interval(uniforms: FloatArray) -> FloatArray:
    # PCG64 doubles lie in [0, 1); the inverse CDF needs (0, 1).
    tiny = np.finfo(np.float64).tiny
    return np.clip(uniforms, tiny, 1.0 - np.finfo(np.float64).epsneg)


def sample(spec: SamplerSpec) -> PointSet:
    """Deterministic point set for a sampler spec."""
    if spec.is_qmc:
        width = spec.dim if spec.scheme == "gauss-sobol" else 2
        uniforms = sobol_sequence(width, spec.count, skip=spec.seed)
        next_index = spec.seed + spec.count

        def redraw() -> FloatArray:
            nonlocal next_index
            point = sobol_sequence(width, 1, skip=next_index)[0]
            next_index += 1
            return point

    else:
        generator = np.random.Generator(np.random.PCG64(spec.seed))
        width = spec.dim if spec.scheme == "gauss-mc" else 2
        uniforms = generator.random((spec.count, width))

        def redraw() -> FloatArray:
            return _open_interval(generator.random(width))

    if spec.scheme.startswith("gauss"):
        points = _gaussian_rows(_open_interval(uniforms), redraw)
    else:
        points = _lambert_map(uniforms)

    logger.debug("sample generated", scheme=spec.scheme, dim=spec.dim, count=spec.count, seed=spec.seed)
    return PointSet.from_array(points)
