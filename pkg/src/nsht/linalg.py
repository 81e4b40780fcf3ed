"""Dense linear-algebra kernels shared by all solvers.

Everything here operates on plain float64 numpy arrays. The one stateful
object is :class:`RegularizedKernel`, which caches the Cholesky factor of
the m-by-m matrix ``A A^T + epsilon I`` so that the ridge-regularized
Newton direction ``(A^T A + epsilon I)^{-1} A^T r`` can be applied once
per iteration at m-by-m cost. The reduction from the n-by-n system to the
m-by-m one is the push-through identity

    (A^T A + eps I)^{-1} A^T  =  A^T (A A^T + eps I)^{-1},

which matters because the solvers run in the regime m << n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

# Pivot threshold for declaring the pursuit-step normal equations rank
# deficient, relative to the spectral norm of the column submatrix.
RANK_PIVOT_RTOL = 1e-12


class RankDeficiencyError(RuntimeError):
    """Raised when a least-squares support submatrix is rank deficient.

    Carries the offending support so experiment harnesses can log which
    candidate support broke the solve.
    """

    def __init__(self, support: np.ndarray, message: str):
        super().__init__(message)
        self.support = np.asarray(support, dtype=np.int64)


def as_matrix(A) -> np.ndarray:
    """Validate and return a finite 2-d float64 array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    return A


def as_vector(v, length: int | None = None) -> np.ndarray:
    """Validate and return a finite 1-d float64 array, optionally of fixed length."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"expected a vector of length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


@dataclass(frozen=True)
class Spectrum:
    """All min(m, n) singular values of a matrix, in descending order."""

    singular_values: np.ndarray

    def __post_init__(self):
        sv = np.asarray(self.singular_values, dtype=np.float64)
        if sv.ndim != 1 or sv.size == 0:
            raise ValueError("spectrum must be a nonempty 1-d array")
        if np.any(sv < 0) or np.any(sv[:-1] < sv[1:]):
            raise ValueError("singular values must be non-negative and descending")
        object.__setattr__(self, "singular_values", sv)

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0])

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])


def singular_values(A) -> Spectrum:
    """Singular values of ``A`` via eigenvalues of the smaller Gram matrix.

    Only the values are needed anywhere in this package, so the full SVD is
    skipped: for m <= n the eigenvalues of ``A A^T`` (else ``A^T A``) are
    computed, tiny round-off negatives are clamped to zero, and the square
    roots are returned descending.
    """
    A = as_matrix(A)
    m, n = A.shape
    gram = A @ A.T if m <= n else A.T @ A
    eigs = np.linalg.eigvalsh(gram)
    eigs = np.clip(eigs, 0.0, None)
    return Spectrum(np.sqrt(eigs[::-1]))


@dataclass(frozen=True)
class RegularizedKernel:
    """Factorized applicator of ``(A^T A + epsilon I)^{-1} A^T``.

    ``gram_factor`` holds the lower-triangular Cholesky factor of
    ``A A^T + epsilon I``; it is built once per (A, epsilon) pair and
    reused for every iteration of a solve.
    """

    source: np.ndarray
    epsilon: float
    gram_factor: np.ndarray = field(repr=False)

    def apply(self, r) -> np.ndarray:
        """Return ``d = (A^T A + epsilon I)^{-1} A^T r`` for an m-vector ``r``."""
        r = as_vector(r, length=self.source.shape[0])
        return self.source.T @ cho_solve((self.gram_factor, True), r, check_finite=False)


def build_kernel(A, epsilon: float) -> RegularizedKernel:
    """Factorize ``A A^T + epsilon I`` and wrap it as a :class:`RegularizedKernel`.

    ``epsilon`` must be strictly positive, which makes the system positive
    definite for any finite ``A``.
    """
    A = as_matrix(A)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    m = A.shape[0]
    gram = A @ A.T
    gram[np.diag_indices(m)] += epsilon
    try:
        factor, lower = cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:  # unreachable for finite input
        raise ArithmeticError(f"factorization of A A^T + {epsilon} I failed") from exc
    assert lower
    return RegularizedKernel(source=A, epsilon=float(epsilon), gram_factor=factor)


def apply_kernel(kernel: RegularizedKernel, r) -> np.ndarray:
    """Functional alias for :meth:`RegularizedKernel.apply`."""
    return kernel.apply(r)


def least_squares_on_support(A, y, support) -> np.ndarray:
    """Minimize ``||y - A z||_2`` over vectors supported on ``support``.

    Returns the full n-vector; entries off the support are exactly zero.
    The normal equations are solved by Cholesky factorization, and a pivot
    falling below ``RANK_PIVOT_RTOL * ||A_support||_2`` raises
    :class:`RankDeficiencyError` instead of silently regularizing.
    """
    A = as_matrix(A)
    m, n = A.shape
    y = as_vector(y, length=m)
    support = np.asarray(support, dtype=np.int64).ravel()
    z = np.zeros(n)
    if support.size == 0:
        return z
    if support.size > m:
        raise ValueError(f"support size {support.size} exceeds row count {m}")
    if np.any(support < 0) or np.any(support >= n) or np.any(np.diff(support) <= 0):
        raise ValueError("support must be strictly increasing and within [0, n)")
    cols = A[:, support]
    gram = cols.T @ cols
    try:
        factor = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise RankDeficiencyError(support, "support submatrix is rank deficient") from None
    spectral = np.linalg.norm(cols, 2)
    min_pivot = float(np.min(np.diag(factor)) ** 2)
    if min_pivot <= RANK_PIVOT_RTOL * spectral:
        raise RankDeficiencyError(
            support,
            f"normal-equations pivot {min_pivot:.3e} below threshold "
            f"{RANK_PIVOT_RTOL * spectral:.3e}",
        )
    z[support] = cho_solve((factor, True), cols.T @ y, check_finite=False)
    return z


def residual(A, y, x) -> float:
    """Euclidean residual ``||y - A x||_2``."""
    A = as_matrix(A)
    y = as_vector(y, length=A.shape[0])
    x = as_vector(x, length=A.shape[1])
    return float(np.linalg.norm(y - A @ x))
