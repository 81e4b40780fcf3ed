"""Sparse signal recovery via Newton-step hard thresholding.

The package provides four iterative recovery algorithms (NSIHT, NSHTP and
the classical IHT/HTP baselines), an exact restricted-isometry oracle for
small matrices, a theorem-driven parameter advisor issuing convergence
certificates, seeded problem generation, and a command-line benchmark
harness with deterministic CSV output.
"""

from nsht.linalg import (
    RankDeficiencyError,
    RegularizedKernel,
    Spectrum,
    build_kernel,
    least_squares_on_support,
    residual,
    singular_values,
)
from nsht.problems import (
    ProblemDescriptor,
    RngStream,
    SparseProblem,
    gaussian_matrix,
    make_problem,
    sparse_signal,
)
from nsht.ric import (
    ConvergenceCertificate,
    EnumerationBudgetError,
    ParameterWindow,
    Refusal,
    RicValue,
    advise_nshtp,
    advise_nsiht,
    certify,
    exact_ric,
)
from nsht.solvers import (
    IterationRecord,
    IterationTrace,
    RecoveryResult,
    SolverConfig,
    htp_step,
    iht_step,
    nshtp_step,
    nsiht_step,
    solve,
)
from nsht.thresholding import (
    SparseVector,
    hard_threshold,
    restrict,
    support_complement,
    support_of,
    support_union,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceCertificate",
    "EnumerationBudgetError",
    "IterationRecord",
    "IterationTrace",
    "ParameterWindow",
    "ProblemDescriptor",
    "RankDeficiencyError",
    "RecoveryResult",
    "Refusal",
    "RegularizedKernel",
    "RicValue",
    "RngStream",
    "SolverConfig",
    "SparseProblem",
    "SparseVector",
    "Spectrum",
    "advise_nshtp",
    "advise_nsiht",
    "build_kernel",
    "certify",
    "exact_ric",
    "gaussian_matrix",
    "hard_threshold",
    "htp_step",
    "iht_step",
    "least_squares_on_support",
    "make_problem",
    "nshtp_step",
    "nsiht_step",
    "residual",
    "restrict",
    "singular_values",
    "solve",
    "sparse_signal",
    "support_complement",
    "support_of",
    "support_union",
]
