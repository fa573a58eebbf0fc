"""
Subset Algebra Component - per-subset linear algebra of the enumeration formula.

Augmented rank tests, the quadratic form gamma, the closed-form tangent cap
of the Phi1 family and the kernel direction of the Phi0 family. The
PrefixFactor / ExtensionBatch pair evaluates all one-element extensions of a
subset at once from a bordered Cholesky factor.
"""

from .core import (
    ContractViolation,
    DegenerateSubsetError,
    ExtensionBatch,
    PrefixFactor,
    SubsetCandidate,
    SubsetFamily,
    affine_rank,
    augmented_gram,
    classify,
    gamma,
    phi0_kernel_direction,
    phi1_cap,
    phi1_threshold,
)

__all__ = [
    "ContractViolation",
    "DegenerateSubsetError",
    "ExtensionBatch",
    "PrefixFactor",
    "SubsetCandidate",
    "SubsetFamily",
    "affine_rank",
    "augmented_gram",
    "classify",
    "gamma",
    "phi0_kernel_direction",
    "phi1_cap",
    "phi1_threshold",
]
