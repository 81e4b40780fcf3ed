"""Hard thresholding operator and support-set algebra.

Supports are plain int64 arrays, strictly increasing, with indices in
``[0, n)``. Ties between equal magnitudes are broken toward the smaller
index so traces are reproducible across runs and platforms, and exact
zeros are never selected: the output of ``hard_threshold`` carries
``min(k, nnz)`` entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def validate_support(support, ambient_len: int) -> np.ndarray:
    """Canonicalize a support to a strictly increasing int64 array in [0, n)."""
    s = np.asarray(support, dtype=np.int64).ravel()
    if s.size and (s[0] < 0 or s[-1] >= ambient_len or np.any(np.diff(s) <= 0)):
        raise ValueError(
            f"support must be strictly increasing within [0, {ambient_len})"
        )
    return s


@dataclass(frozen=True, eq=False)
class SparseVector:
    """A vector stored as (ambient length, support, nonzero values)."""

    ambient_len: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.ambient_len < 1:
            raise ValueError("ambient length must be positive")
        support = validate_support(self.support, self.ambient_len)
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if support.size != values.size:
            raise ValueError("support and values must have equal length")
        if not np.all(np.isfinite(values)) or np.any(values == 0.0):
            raise ValueError("stored values must be finite and nonzero")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dense(cls, x) -> "SparseVector":
        x = np.asarray(x, dtype=np.float64).ravel()
        support = np.flatnonzero(x).astype(np.int64)
        return cls(ambient_len=x.size, support=support, values=x[support])

    def dense(self) -> np.ndarray:
        out = np.zeros(self.ambient_len)
        out[self.support] = self.values
        return out

    @property
    def nnz(self) -> int:
        return int(self.support.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and self.ambient_len == other.ambient_len
            and np.array_equal(self.support, other.support)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def hard_threshold(z, k: int) -> SparseVector:
    """Keep the k largest magnitudes of ``z`` and zero the rest.

    Selection orders by (magnitude descending, index ascending); exact
    zeros are never kept, so the result has ``min(k, nnz)`` entries.
    """
    z = np.asarray(z, dtype=np.float64).ravel()
    if not np.all(np.isfinite(z)):
        raise ValueError("input contains non-finite entries")
    if k < 0 or k > z.size:
        raise ValueError(f"k must lie in [0, {z.size}], got {k}")
    order = np.argsort(-np.abs(z), kind="stable")
    kept = order[:k]
    kept = kept[z[kept] != 0.0]
    kept.sort()
    return SparseVector(ambient_len=z.size, support=kept.astype(np.int64), values=z[kept])


def support_of(v) -> np.ndarray:
    """Exact set of nonzero indices of a dense array or SparseVector."""
    if isinstance(v, SparseVector):
        return v.support.copy()
    v = np.asarray(v, dtype=np.float64).ravel()
    return np.flatnonzero(v).astype(np.int64)


def support_union(*supports) -> np.ndarray:
    arrays = [np.asarray(s, dtype=np.int64).ravel() for s in supports]
    if not arrays:
        return np.empty(0, dtype=np.int64)
    return np.union1d(arrays[0], np.concatenate(arrays[1:])) if len(arrays) > 1 else np.unique(arrays[0])


def support_complement(support, ambient_len: int) -> np.ndarray:
    support = validate_support(support, ambient_len)
    mask = np.ones(ambient_len, dtype=bool)
    mask[support] = False
    return np.flatnonzero(mask).astype(np.int64)


def restrict(x, support) -> np.ndarray:
    """Zero the entries of ``x`` outside ``support``, keeping ambient length."""
    x = np.asarray(x, dtype=np.float64).ravel()
    support = validate_support(support, x.size)
    out = np.zeros_like(x)
    out[support] = x[support]
    return out
