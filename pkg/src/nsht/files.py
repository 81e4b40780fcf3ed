"""On-disk formats: problem descriptor JSON and raw matrix payloads.

A problem file is the descriptor JSON produced by
:meth:`ProblemDescriptor.to_json`; regeneration from it is bit-exact.
Matrices can additionally be stored raw for consumers that do not want
to regenerate: a 16-byte header (8-byte ASCII magic ``NHTMAT01``, then
the row and column counts as 32-bit little-endian unsigned integers)
followed by the row-major float64 little-endian entries.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from nsht.problems import ProblemDescriptor, SparseProblem, regenerate

MATRIX_MAGIC = b"NHTMAT01"
_HEADER = struct.Struct("<8sII")


def write_matrix(path, A: np.ndarray) -> None:
    A = np.ascontiguousarray(A, dtype="<f8")
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    m, n = A.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MATRIX_MAGIC, m, n))
        fh.write(A.tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated matrix file")
    magic, m, n = _HEADER.unpack_from(raw)
    if magic != MATRIX_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MATRIX_MAGIC!r}")
    body = raw[_HEADER.size :]
    expected = 8 * m * n
    if len(body) != expected:
        raise ValueError(f"{path}: payload holds {len(body)} bytes, expected {expected}")
    return np.frombuffer(body, dtype="<f8").reshape(m, n).astype(np.float64)


def write_problem(path, problem: SparseProblem, matrix_path=None) -> None:
    """Write a problem's descriptor JSON, optionally with a raw matrix payload."""
    if problem.descriptor is None:
        raise ValueError("problem carries no descriptor; only generated problems serialize")
    Path(path).write_text(problem.descriptor.to_json() + "\n")
    if matrix_path is not None:
        write_matrix(matrix_path, problem.A)


def read_problem(path) -> SparseProblem:
    """Regenerate the exact problem recorded in a descriptor file."""
    descriptor = ProblemDescriptor.from_json(Path(path).read_text())
    return regenerate(descriptor)
