"""
Samplers Component - point sets on spheres for the sampling-scheme comparison.

Normalized Gaussians driven by pseudorandom or Sobol' uniforms, and the
Lambert cylindrical equal-area map from the unit square to S^2 driven the
same two ways.
"""

from .core import (
    MC_GENERATOR,
    MAX_SOBOL_DIM,
    SCHEMES,
    SamplerError,
    SamplerSpec,
    UnsupportedDimensionError,
    ZeroVectorError,
    gaussian_point,
    lambert_point,
    sample,
    sobol_sequence,
)

__all__ = [
    "MC_GENERATOR",
    "MAX_SOBOL_DIM",
    "SCHEMES",
    "SamplerError",
    "SamplerSpec",
    "UnsupportedDimensionError",
    "ZeroVectorError",
    "gaussian_point",
    "lambert_point",
    "sample",
    "sobol_sequence",
]
