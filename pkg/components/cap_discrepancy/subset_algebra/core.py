"""
Core subset linear algebra for the subset_algebra component.

For an index set I the augmented matrix stacks the points X_I over a row of
-1 entries, so its Gram matrix is G_II + 1 1^T with G the Gram matrix of the
whole sample. Everything here is computed from G; the sample coordinates are
only touched for Phi0 kernel directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Literal, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy.linalg import solve_triangular

from cap_discrepancy.cap_measure import DomainError
from cap_discrepancy.discrepancy_core import Cap, PointSet
from cap_discrepancy.unified_logger import get_logger

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.intp]

DEFAULT_GAMMA_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10
FEASIBILITY_TOLERANCE = 1e-8

KernelConvention = Literal["last", "first"]

logger = get_logger(__name__)


class DegenerateSubsetError(ArithmeticError):
    """Subset is numerically singular; the caller skips it."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


class ContractViolation(ValueError):
    """Operation called outside its precondition."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


class SubsetFamily(str, Enum):
    """Classification of an index set."""

    PHI1 = "Phi1"
    PHI0 = "Phi0"
    SKIP = "Skip"

    @property
    def tie_rank(self) -> int:
        """Order used to break ties between equal discrepancy values."""
        return {"Phi1": 0, "Phi0": 1, "Skip": 2}[self.value]


@dataclass(frozen=True, eq=False)
class SubsetCandidate:
    """An index set with its rank data, gamma, family and induced caps."""

    indices: tuple[int, ...]
    aug_rank: int
    gamma: float | None
    family: SubsetFamily
    caps: tuple[Cap, ...] = ()
    reason: str = ""


def _as_index_tuple(indices: Sequence[int]) -> tuple[int, ...]:
    result = tuple(sorted(int(i) for i in indices))
    if not result:
        raise ContractViolation("Index set must be nonempty")
    return result


def augmented_gram(ps: PointSet, indices: Sequence[int]) -> FloatArray:
    """Gram matrix of the augmented columns: <x^a, x^b> + 1."""
    idx = np.asarray(_as_index_tuple(indices))
    return ps.gram[np.ix_(idx, idx)] + 1.0


def _pivoted_cholesky_rank(matrix: FloatArray, rank_tol: float) -> int:
    a = np.array(matrix, dtype=np.float64)
    size = a.shape[0]
    threshold = rank_tol * float(np.max(np.diag(a)))
    rank = 0
    for i in range(size):
        diagonal = np.diag(a)[i:]
        j = i + int(np.argmax(diagonal))
        if a[j, j] <= threshold:
            break
        if j != i:
            a[:, [i, j]] = a[:, [j, i]]
            a[[i, j], :] = a[[j, i], :]
        a[i, i] = math.sqrt(a[i, i])
        a[i + 1 :, i] /= a[i, i]
        a[i + 1 :, i + 1 :] -= np.outer(a[i + 1 :, i], a[i + 1 :, i])
        rank += 1
    return rank


def affine_rank(ps: PointSet, indices: Sequence[int], rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Rank of the augmented matrix of I.

    Counted as the number of pivots of a diagonally pivoted Cholesky
    factorization of the augmented Gram matrix that exceed
    ``rank_tol * max diagonal``. Pivot choice is argmax with the lowest
    index on ties, so the result is deterministic.
    """
    return _pivoted_cholesky_rank(augmented_gram(ps, indices), rank_tol)


def _solve_ones(ps: PointSet, indices: tuple[int, ...], rank_tol: float) -> FloatArray:
    matrix = augmented_gram(ps, indices)
    try:
        lower, _ = scipy.linalg.cho_factor(matrix, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise DegenerateSubsetError(
            f"Augmented Gram matrix of {indices} is not positive definite",
            {"indices": indices},
        ) from e
    # Squared pivots are the Schur complements tested in PrefixFactor.extend.
    pivots = np.diag(lower) ** 2
    threshold = rank_tol * float(np.max(np.diag(matrix)))
    if np.any(pivots <= threshold):
        raise DegenerateSubsetError(
            f"Augmented Gram matrix of {indices} is numerically singular",
            {"indices": indices, "min_pivot": float(np.min(pivots)), "threshold": threshold},
        )
    return scipy.linalg.cho_solve((lower, True), np.ones(len(indices)), check_finite=False)


def gamma(ps: PointSet, indices: Sequence[int], rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """gamma_I = 1^T (X~_I^T X~_I)^{-1} 1 via a Cholesky solve.

    Raises:
        DegenerateSubsetError: If a Cholesky pivot does not exceed
            ``rank_tol * max diagonal`` or gamma <= 0
    """
    idx = _as_index_tuple(indices)
    value = float(np.sum(_solve_ones(ps, idx, rank_tol)))
    if not value > 0.0:
        raise DegenerateSubsetError(
            f"Non-positive gamma for {idx}: {value}", {"indices": idx, "gamma": value}
        )
    return value


def phi1_threshold(gamma_value: float) -> float:
    """t_I = ((1 - gamma) / gamma)^{1/2}."""
    return math.sqrt((1.0 - gamma_value) / gamma_value)


def phi1_cap(
    ps: PointSet,
    indices: Sequence[int],
    gamma_value: float,
    gamma_tol: float = DEFAULT_GAMMA_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[FloatArray, float]:
    """Tangent cap through the points of I for a Phi1 subset.

    Returns:
        (w, t) with w = ((1 + t^2) / t) X_I y, y solving the augmented system

    Raises:
        ContractViolation: If gamma is not in (0, 1 - gamma_tol)
        DegenerateSubsetError: If the augmented Gram matrix of I is singular
    """
    if not 0.0 < gamma_value < 1.0 - gamma_tol:
        raise ContractViolation(
            f"gamma {gamma_value} outside (0, 1 - {gamma_tol})",
            {"gamma": gamma_value, "gamma_tol": gamma_tol},
        )
    idx = _as_index_tuple(indices)
    y = _solve_ones(ps, idx, rank_tol)
    t = phi1_threshold(gamma_value)
    w = ((1.0 + t * t) / t) * (ps.points[list(idx)].T @ y)
    return w, t


def phi0_kernel_direction(
    ps: PointSet,
    indices: Sequence[int],
    rank_tol: float = DEFAULT_RANK_TOL,
    convention: KernelConvention = "last",
) -> FloatArray:
    """Unit vector w with X_I^T w = 0 from a full SVD of X_I.

    ``"last"`` takes the last left singular vector with its first nonzero
    component positive; ``"first"`` takes the first kernel vector with its
    first nonzero component negative.

    Raises:
        DegenerateSubsetError: If the kernel of X_I^T is numerically trivial
    """
    idx = _as_index_tuple(indices)
    matrix = ps.points[list(idx)].T
    u, singular, _ = np.linalg.svd(matrix, full_matrices=True)
    rank = int(np.count_nonzero(singular > rank_tol * max(float(singular[0]), 1.0)))
    if rank >= ps.n:
        raise DegenerateSubsetError(
            f"Kernel of X_I^T is trivial for {idx}",
            {"indices": idx, "singular_values": singular.tolist()},
        )

    w = u[:, -1] if convention == "last" else u[:, rank]
    nonzero = np.flatnonzero(np.abs(w) > 1e-12)
    lead = w[nonzero[0]]
    if (convention == "last" and lead < 0) or (convention == "first" and lead > 0):
        w = -w
    w = w / np.linalg.norm(w)

    residual = float(np.max(np.abs(matrix.T @ w)))
    if residual > FEASIBILITY_TOLERANCE:
        raise DegenerateSubsetError(
            f"Kernel direction residual {residual:.3e} too large for {idx}",
            {"indices": idx, "residual": residual},
        )
    return w


def classify(
    ps: PointSet,
    indices: Sequence[int],
    min_bound: int,
    gamma_tol: float = DEFAULT_GAMMA_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
    convention: KernelConvention = "last",
) -> SubsetCandidate:
    """Classify I into Phi1, Phi0 or Skip and build its candidate caps.

    Raises:
        ContractViolation: If #I is outside [1, min_bound]
    """
    idx = _as_index_tuple(indices)
    if len(idx) > min_bound:
        raise ContractViolation(
            f"Subset size {len(idx)} exceeds min bound {min_bound}",
            {"indices": idx, "min_bound": min_bound},
        )

    rank = affine_rank(ps, idx, rank_tol)
    if rank < len(idx):
        return SubsetCandidate(idx, rank, None, SubsetFamily.SKIP, reason="affinely dependent")

    try:
        g = gamma(ps, idx, rank_tol)
        if g < 1.0 - gamma_tol:
            w, t = phi1_cap(ps, idx, g, gamma_tol, rank_tol)
            cap = Cap(w, min(t, 1.0))
            return SubsetCandidate(idx, rank, g, SubsetFamily.PHI1, (cap, cap.negated()))
        if abs(g - 1.0) <= gamma_tol and len(idx) == min_bound:
            w = phi0_kernel_direction(ps, idx, rank_tol, convention)
            cap = Cap(w, 0.0)
            return SubsetCandidate(idx, rank, g, SubsetFamily.PHI0, (cap, cap.negated()))
    except (DegenerateSubsetError, DomainError) as e:
        logger.debug("degenerate subset skipped", indices=idx, error=str(e))
        return SubsetCandidate(idx, rank, None, SubsetFamily.SKIP, reason=str(e))

    reason = "gamma above one" if g > 1.0 + gamma_tol else "gamma one below min bound"
    return SubsetCandidate(idx, rank, g, SubsetFamily.SKIP, reason=reason)


@dataclass(frozen=True, eq=False)
class PrefixFactor:
    """Cholesky data of an affinely independent index set (the DFS prefix).

    ``lower`` is the Cholesky factor of the augmented Gram matrix,
    ``z = lower^{-1} 1`` and ``y = (augmented Gram)^{-1} 1``.
    """

    indices: tuple[int, ...]
    lower: FloatArray
    z: FloatArray
    y: FloatArray
    max_diag: float = 0.0

    @classmethod
    def empty(cls) -> PrefixFactor:
        return cls((), np.zeros((0, 0)), np.zeros(0), np.zeros(0), 0.0)

    @property
    def size(self) -> int:
        return len(self.indices)

    def extend(self, gram: FloatArray, candidates: IntArray, rank_tol: float) -> ExtensionBatch:
        """Rank test and gamma for every extension I + {k}, k in candidates.

        The Schur complement of the bordered augmented Gram matrix is the new
        Cholesky pivot; extensions whose pivot does not exceed
        ``rank_tol * max diagonal`` are affinely dependent.
        """
        count = candidates.size
        diag = gram[candidates, candidates] + 1.0
        if self.size:
            prefix = np.asarray(self.indices)
            cross = gram[np.ix_(prefix, candidates)] + 1.0
            bordered = solve_triangular(self.lower, cross, lower=True, check_finite=False)
            back = solve_triangular(self.lower.T, bordered, lower=False, check_finite=False)
            schur = diag - np.einsum("ij,ij->j", bordered, bordered)
            z_dot = self.z @ bordered
        else:
            bordered = np.zeros((0, count))
            back = np.zeros((0, count))
            schur = diag.copy()
            z_dot = np.zeros(count)

        independent = schur > rank_tol * np.maximum(self.max_diag, diag)
        pivot = np.sqrt(np.where(independent, schur, 1.0))
        last = (1.0 - z_dot) / pivot
        gammas = np.where(independent, float(self.z @ self.z) + last * last, np.nan)
        return ExtensionBatch(
            prefix=self,
            candidates=candidates,
            diag=diag,
            bordered=bordered,
            back=back,
            independent=independent,
            pivot=pivot,
            last=last,
            gamma=gammas,
        )


@dataclass(frozen=True, eq=False)
class ExtensionBatch:
    """All one-element extensions of a prefix, evaluated column-wise."""

    prefix: PrefixFactor
    candidates: IntArray
    diag: FloatArray
    bordered: FloatArray
    back: FloatArray
    independent: NDArray[np.bool_]
    pivot: FloatArray
    last: FloatArray
    gamma: FloatArray
    y_last: FloatArray = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "y_last", self.last / self.pivot)

    def child(self, column: int) -> PrefixFactor:
        """Prefix factor of I + {candidates[column]} by bordering the Cholesky factor."""
        size = self.prefix.size
        lower = np.zeros((size + 1, size + 1))
        lower[:size, :size] = self.prefix.lower
        lower[size, :size] = self.bordered[:, column]
        lower[size, size] = self.pivot[column]
        y_new = self.y_last[column]
        y = np.append(self.prefix.y - self.back[:, column] * y_new, y_new)
        return PrefixFactor(
            indices=self.prefix.indices + (int(self.candidates[column]),),
            lower=lower,
            z=np.append(self.prefix.z, self.last[column]),
            y=y,
            max_diag=max(self.prefix.max_diag, float(self.diag[column])),
        )

    def gram_solution_products(self, gram: FloatArray, columns: IntArray) -> FloatArray:
        """(G_{:, I} y_I) for the extensions in ``columns``, shape (N, len(columns)).

        Scaled by (1 + t^2) / t this gives <w_I, x^j> for every sample point.
        """
        extension = self.candidates[columns]
        products = gram[:, extension] * self.y_last[columns][None, :]
        if self.prefix.size:
            prefix = np.asarray(self.prefix.indices)
            gram_prefix = gram[:, prefix]
            base = gram_prefix @ self.prefix.y
            correction = (gram_prefix @ self.back[:, columns]) * self.y_last[columns][None, :]
            products = products - correction + base[:, None]
        return products
