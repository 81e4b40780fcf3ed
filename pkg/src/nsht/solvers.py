"""Iterative sparse recovery algorithms with uniform tracing.

Four algorithms share one driver:

* ``nsiht``: threshold after a ridge-regularized Newton step,
  ``x <- H_k(x + lam * (A^T A + eps I)^{-1} A^T (y - A x))``.
* ``nshtp``: the same step followed by an exact least-squares re-fit on
  the selected support (the pursuit step).
* ``iht`` / ``htp``: classical baselines using the raw gradient direction
  ``A^T (y - A x)`` instead of the regularized Newton direction.

Solves are pure functions of (problem, config): no global state, no
entropy. A run that produces a non-finite iterate or a rank-deficient
pursuit system ends with status ``numeric-failure`` instead of raising,
so experiment harnesses can count such trials as plain failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nsht.linalg import (
    RankDeficiencyError,
    RegularizedKernel,
    as_matrix,
    as_vector,
    build_kernel,
    least_squares_on_support,
)
from nsht.problems import SparseProblem
from nsht.thresholding import SparseVector, hard_threshold

ALGORITHMS = ("nsiht", "nshtp", "iht", "htp")
NEWTON_ALGORITHMS = ("nsiht", "nshtp")
PURSUIT_ALGORITHMS = ("nshtp", "htp")

STOP_RELATIVE_ERROR = "relative-error-to-truth"
STOP_RESIDUAL = "residual-norm"
STOP_SUPPORT_STABLE = "support-stable"
STOP_BUDGET = "iteration-budget"
STOP_RULES = (STOP_RELATIVE_ERROR, STOP_RESIDUAL, STOP_SUPPORT_STABLE, STOP_BUDGET)

STATUS_CONVERGED = "converged"
STATUS_BUDGET = "budget-exhausted"
STATUS_NUMERIC = "numeric-failure"

# Consecutive iterations with an unchanged support required by the
# support-stable stop rule.
SUPPORT_STABLE_RUNS = 3


@dataclass(frozen=True)
class SolverConfig:
    """Algorithm selection and iteration controls.

    ``epsilon`` (the Hessian ridge) is ignored by the gradient baselines.
    ``lam`` is the stepsize. ``initial`` warm-starts the iteration and
    must be k-sparse; the default is the zero vector.
    """

    algorithm: str
    k: int
    epsilon: float = 1.0
    lam: float = 1.0
    max_iterations: int = 100
    tolerance: float = 1e-3
    stop_rule: str = STOP_RELATIVE_ERROR
    initial: np.ndarray | None = None
    verbose_trace: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {STOP_RULES}, got {self.stop_rule!r}")
        if self.algorithm in NEWTON_ALGORITHMS and not self.epsilon > 0:
            raise ValueError("epsilon must be positive for the Newton-step algorithms")
        if not self.lam > 0:
            raise ValueError("lam must be positive")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    x: SparseVector
    residual: float
    xbar: SparseVector | None = None
    rel_error: float | None = None
    pre_threshold: np.ndarray | None = None

    @property
    def support(self) -> np.ndarray:
        return self.x.support


@dataclass
class IterationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    status: str = STATUS_BUDGET

    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.records])


@dataclass(frozen=True)
class RecoveryResult:
    x: SparseVector
    trace: IterationTrace
    iterations_used: int
    success: bool


def _newton_update(A, kernel, y, x_dense, k, lam):
    r = y - A @ x_dense
    u = x_dense + lam * kernel.apply(r)
    return u, hard_threshold(u, k)


def nsiht_step(A, kernel: RegularizedKernel, y, x_p: SparseVector, k: int, lam: float) -> SparseVector:
    """One thresholded Newton step from the k-sparse iterate ``x_p``."""
    A = as_matrix(A)
    y = as_vector(y, length=A.shape[0])
    _, x_next = _newton_update(A, kernel, y, x_p.dense(), k, lam)
    return x_next


def nshtp_step(
    A, kernel: RegularizedKernel, y, x_p: SparseVector, k: int, lam: float
) -> tuple[SparseVector, SparseVector]:
    """One Newton step plus pursuit; returns (intermediate, refined) iterates.

    The refined iterate minimizes the residual over the intermediate's
    support, so its residual never exceeds the intermediate's.
    """
    A = as_matrix(A)
    y = as_vector(y, length=A.shape[0])
    _, xbar = _newton_update(A, kernel, y, x_p.dense(), k, lam)
    refined = least_squares_on_support(A, y, xbar.support)
    return xbar, SparseVector.from_dense(refined)


def iht_step(A, y, x_p: SparseVector, k: int, lam: float) -> SparseVector:
    """One classical gradient-direction thresholding step."""
    A = as_matrix(A)
    y = as_vector(y, length=A.shape[0])
    x_dense = x_p.dense()
    u = x_dense + lam * (A.T @ (y - A @ x_dense))
    return hard_threshold(u, k)


def htp_step(A, y, x_p: SparseVector, k: int, lam: float) -> tuple[SparseVector, SparseVector]:
    """One gradient step plus pursuit; returns (intermediate, refined)."""
    xbar = iht_step(A, y, x_p, k, lam)
    refined = least_squares_on_support(as_matrix(A), as_vector(y), xbar.support)
    return xbar, SparseVector.from_dense(refined)


def _rel_error(x_dense, truth_dense, truth_norm) -> float:
    err = float(np.linalg.norm(x_dense - truth_dense))
    if truth_norm == 0.0:
        return 0.0 if err == 0.0 else float("inf")
    return err / truth_norm


def solve(problem: SparseProblem, config: SolverConfig) -> RecoveryResult:
    """Run the configured algorithm on a problem until its stop rule fires.

    The trace records the initial point and every completed iteration:
    the k-sparse iterate, its residual, the pre-pursuit intermediate for
    the pursuit algorithms, and the relative error whenever the problem
    carries a ground truth. Identical (problem, config) inputs produce
    bit-identical traces.
    """
    A = as_matrix(problem.A)
    m, n = A.shape
    y = as_vector(problem.y, length=m)
    k = config.k

    truth_dense = None
    truth_norm = 0.0
    if problem.truth is not None:
        truth_dense = problem.truth.dense()
        truth_norm = float(np.linalg.norm(truth_dense))
    if config.stop_rule == STOP_RELATIVE_ERROR and truth_dense is None:
        raise ValueError("relative-error stop rule requires a problem with ground truth")

    if config.initial is None:
        x = SparseVector(ambient_len=n, support=np.empty(0, dtype=np.int64), values=np.empty(0))
    else:
        x = SparseVector.from_dense(as_vector(config.initial, length=n))
        if x.nnz > k:
            raise ValueError(f"initial point has {x.nnz} nonzeros, exceeding k={k}")

    kernel = None
    if config.algorithm in NEWTON_ALGORITHMS:
        kernel = build_kernel(A, config.epsilon)

    trace = IterationTrace()

    def record(p, x_sv, xbar=None, u=None):
        x_dense = x_sv.dense()
        rec = IterationRecord(
            iteration=p,
            x=x_sv,
            residual=float(np.linalg.norm(y - A @ x_dense)),
            xbar=xbar,
            rel_error=None
            if truth_dense is None
            else _rel_error(x_dense, truth_dense, truth_norm),
            pre_threshold=u if config.verbose_trace else None,
        )
        trace.records.append(rec)
        return rec

    def stopped(rec) -> bool:
        if config.stop_rule == STOP_RELATIVE_ERROR:
            return rec.rel_error <= config.tolerance
        if config.stop_rule == STOP_RESIDUAL:
            return rec.residual <= config.tolerance
        if config.stop_rule == STOP_SUPPORT_STABLE:
            recent = trace.records[-SUPPORT_STABLE_RUNS:]
            return len(recent) == SUPPORT_STABLE_RUNS and all(
                np.array_equal(r.support, recent[0].support) for r in recent
            )
        return False

    rec = record(0, x)
    iterations_used = 0
    if stopped(rec):
        trace.status = STATUS_CONVERGED
        return RecoveryResult(x=x, trace=trace, iterations_used=0, success=True)

    for p in range(1, config.max_iterations + 1):
        x_dense = x.dense()
        try:
            if config.algorithm in NEWTON_ALGORITHMS:
                u, xbar = _newton_update(A, kernel, y, x_dense, k, config.lam)
            else:
                u = x_dense + config.lam * (A.T @ (y - A @ x_dense))
                if not np.all(np.isfinite(u)):
                    raise FloatingPointError("iterate diverged")
                xbar = hard_threshold(u, k)
            if config.algorithm in PURSUIT_ALGORITHMS:
                x_next = SparseVector.from_dense(least_squares_on_support(A, y, xbar.support))
            else:
                x_next = xbar
        except (ValueError, FloatingPointError, RankDeficiencyError):
            trace.status = STATUS_NUMERIC
            return RecoveryResult(x=x, trace=trace, iterations_used=iterations_used, success=False)

        x = x_next
        iterations_used = p
        rec = record(
            p,
            x,
            xbar=xbar if config.algorithm in PURSUIT_ALGORITHMS else None,
            u=u,
        )
        if stopped(rec):
            trace.status = STATUS_CONVERGED
            return RecoveryResult(x=x, trace=trace, iterations_used=p, success=True)

    trace.status = STATUS_BUDGET
    return RecoveryResult(
        x=x,
        trace=trace,
        iterations_used=iterations_used,
        success=config.stop_rule == STOP_BUDGET,
    )
