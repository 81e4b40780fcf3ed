"""Seeded generation of measurement matrices, sparse signals, and measurements.

Randomness comes from numpy's Philox counter-based bit generator, keyed
directly with the pair ``(seed, stream)``. The key bypasses numpy's seed
hashing, so identical ``(seed, stream)`` pairs reproduce identical draws
on every platform, and distinct stream ids give statistically independent
streams that can be generated concurrently. Entropy never comes from the
system; every draw is tied to an explicit seed.

Draw order inside :func:`make_problem` is fixed: matrix entries first,
then the signal support, then the signal values, then (only when
``noise_scale > 0``) the noise vector. Problems generated at different
noise scales therefore share the same matrix and signal.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from nsht.thresholding import SparseVector

_MASK64 = (1 << 64) - 1

NOISE_MODE_STD = "std"
NOISE_MODE_NORM = "norm"
_NOISE_MODES = (NOISE_MODE_STD, NOISE_MODE_NORM)


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream) pair naming one deterministic Philox stream."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ProblemDescriptor:
    """Generation parameters that fully determine a problem instance."""

    m: int
    n: int
    k: int
    noise_scale: float
    ensemble: str
    seed: int
    stream: int
    noise_mode: str = NOISE_MODE_STD

    def to_json(self) -> str:
        payload = asdict(self)
        if self.noise_mode == NOISE_MODE_STD:
            del payload["noise_mode"]
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProblemDescriptor":
        raw = json.loads(text)
        raw.setdefault("noise_mode", NOISE_MODE_STD)
        return cls(**raw)


@dataclass(frozen=True)
class SparseProblem:
    """A recovery instance: measurements ``y`` of a k-sparse ground truth."""

    A: np.ndarray
    y: np.ndarray
    truth: SparseVector | None
    noise: np.ndarray | None
    k: int
    descriptor: ProblemDescriptor | None = None

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def seed(self) -> int | None:
        return self.descriptor.seed if self.descriptor is not None else None


def gaussian_matrix(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """An m-by-n matrix of i.i.d. standard normal entries."""
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    return rng.standard_normal((m, n))


def _uniform_support(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    # Partial Fisher-Yates over [0, n): after k swaps the prefix is a
    # uniform k-subset in uniform order.
    pool = np.arange(n, dtype=np.int64)
    for i in range(k):
        j = int(rng.integers(i, n))
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:k])


def sparse_signal(n: int, k: int, rng: np.random.Generator) -> SparseVector:
    """A k-sparse signal with uniform support and standard normal values."""
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    support = _uniform_support(n, k, rng)
    values = rng.standard_normal(k)
    while np.any(values == 0.0):  # measure-zero event, but keep nnz exact
        zeros = values == 0.0
        values[zeros] = rng.standard_normal(int(zeros.sum()))
    return SparseVector(ambient_len=n, support=support, values=values)


def make_problem(
    m: int,
    n: int,
    k: int,
    noise_scale: float = 0.0,
    stream: RngStream = RngStream(0),
    noise_mode: str = NOISE_MODE_STD,
) -> SparseProblem:
    """Assemble a seeded recovery problem ``y = A x + e``.

    ``noise_scale`` is the per-entry standard deviation of the Gaussian
    noise vector; with ``noise_mode="norm"`` the drawn vector is instead
    rescaled so its Euclidean norm equals ``noise_scale`` exactly.
    """
    if noise_scale < 0:
        raise ValueError("noise_scale must be non-negative")
    if noise_mode not in _NOISE_MODES:
        raise ValueError(f"noise_mode must be one of {_NOISE_MODES}")
    rng = stream.generator()
    A = gaussian_matrix(m, n, rng)
    truth = sparse_signal(n, k, rng)
    y = A @ truth.dense()
    noise = None
    if noise_scale > 0:
        noise = noise_scale * rng.standard_normal(m)
        if noise_mode == NOISE_MODE_NORM:
            noise *= noise_scale / np.linalg.norm(noise)
        y = y + noise
    descriptor = ProblemDescriptor(
        m=m,
        n=n,
        k=k,
        noise_scale=float(noise_scale),
        ensemble="gaussian",
        seed=stream.seed,
        stream=stream.stream,
        noise_mode=noise_mode,
    )
    return SparseProblem(A=A, y=y, truth=truth, noise=noise, k=k, descriptor=descriptor)


def regenerate(descriptor: ProblemDescriptor) -> SparseProblem:
    """Rebuild the exact problem a descriptor was recorded from."""
    return make_problem(
        m=descriptor.m,
        n=descriptor.n,
        k=descriptor.k,
        noise_scale=descriptor.noise_scale,
        stream=RngStream(descriptor.seed, descriptor.stream),
        noise_mode=descriptor.noise_mode,
    )
