"""Exact restricted-isometry constants, parameter windows, and certificates.

The q-th order restricted isometry constant of ``A`` is computed exactly
as ``max_S ||A_S^T A_S - I||_2`` over supports of size q. Restricting the
maximum to size exactly q is valid because the deviation norm over a
subset never exceeds the norm over a superset (eigenvalue interlacing);
tests guard the reduction by also checking monotonicity across orders.

The advisors turn a spectrum and an exact (or user-supplied) constant
into the admissible ridge/stepsize region for guaranteed geometric
convergence, and :func:`certify` evaluates the contraction factor ``rho``
and noise amplification ``tau`` for a concrete parameter choice, refusing
when any hypothesis fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from nsht.linalg import Spectrum, as_matrix

DEFAULT_ENUMERATION_BUDGET = 2_000_000

# Largest admissible delta_3k for each algorithm's convergence guarantee.
NSIHT_DELTA_LIMIT = 1.0 / math.sqrt(3.0)
NSHTP_DELTA_LIMIT = 0.5

_DELTA_LIMITS = {"nsiht": NSIHT_DELTA_LIMIT, "nshtp": NSHTP_DELTA_LIMIT}


class EnumerationBudgetError(RuntimeError):
    """Raised when exact RIC enumeration would exceed the subset budget."""


@dataclass(frozen=True)
class RicValue:
    """Exact restricted isometry constant of one order."""

    order: int
    value: float
    satisfies_rip: bool


def _sym_spectral_norm(M: np.ndarray) -> float:
    # Closed forms for the 1x1 and 2x2 symmetric cases, LAPACK above.
    q = M.shape[0]
    if q == 1:
        return abs(float(M[0, 0]))
    if q == 2:
        a, b, c = float(M[0, 0]), float(M[0, 1]), float(M[1, 1])
        center = 0.5 * (a + c)
        radius = math.hypot(0.5 * (a - c), b)
        return max(abs(center + radius), abs(center - radius))
    return float(np.max(np.abs(np.linalg.eigvalsh(M))))


def exact_ric(A, q: int, budget: int = DEFAULT_ENUMERATION_BUDGET) -> RicValue:
    """Exact order-q restricted isometry constant by support enumeration.

    Raises :class:`EnumerationBudgetError` when C(n, q) exceeds ``budget``;
    large instances should supply externally known constants instead.
    """
    A = as_matrix(A)
    n = A.shape[1]
    if not 1 <= q <= n:
        raise ValueError(f"order must lie in [1, {n}], got {q}")
    count = math.comb(n, q)
    if count > budget:
        raise EnumerationBudgetError(
            f"enumerating C({n}, {q}) = {count} supports exceeds the budget of "
            f"{budget}; use a smaller instance or supply the constant directly"
        )
    gram = A.T @ A
    eye = np.eye(q)
    worst = 0.0
    for support in combinations(range(n), q):
        idx = np.asarray(support)
        deviation = gram[np.ix_(idx, idx)] - eye
        worst = max(worst, _sym_spectral_norm(deviation))
    return RicValue(order=q, value=worst, satisfies_rip=worst < 1.0)


@dataclass(frozen=True)
class ParameterWindow:
    """Admissible (ridge, stepsize) region for one algorithm's guarantee.

    ``epsilon_lower`` is an exclusive bound; the stepsize interval is
    ``(lambda_lower, lambda_upper]`` and refers to the concrete ``epsilon``
    recorded in the window. An empty interval marks infeasibility.
    """

    algorithm: str
    epsilon_lower: float
    epsilon: float
    lambda_lower: float
    lambda_upper: float
    reason: str | None = None

    @property
    def feasible(self) -> bool:
        return self.lambda_lower < self.lambda_upper

    def contains(self, lam: float) -> bool:
        return self.lambda_lower < lam <= self.lambda_upper


def _epsilon_floor(spectrum: Spectrum, delta_3k: float, limit: float) -> float:
    s1_sq = spectrum.sigma_max**2
    sm_sq = spectrum.sigma_min**2
    return max(s1_sq, ((s1_sq - sm_sq) / (limit - delta_3k) - 1.0) * s1_sq)


def _advise(algorithm: str, spectrum: Spectrum, delta_3k: float, epsilon: float | None) -> ParameterWindow:
    limit = _DELTA_LIMITS[algorithm]
    if not 0.0 <= delta_3k < 1.0:
        raise ValueError(f"delta_3k must lie in [0, 1), got {delta_3k}")
    if delta_3k >= limit:
        return ParameterWindow(
            algorithm=algorithm,
            epsilon_lower=math.inf,
            epsilon=epsilon if epsilon is not None else math.nan,
            lambda_lower=math.inf,
            lambda_upper=-math.inf,
            reason=f"delta_3k = {delta_3k} is not below the {algorithm} limit {limit:.6f}",
        )
    floor = _epsilon_floor(spectrum, delta_3k, limit)
    if epsilon is None:
        epsilon = 2.0 * floor
    if not epsilon > floor:
        return ParameterWindow(
            algorithm=algorithm,
            epsilon_lower=floor,
            epsilon=epsilon,
            lambda_lower=math.inf,
            lambda_upper=-math.inf,
            reason=f"epsilon = {epsilon} does not exceed the lower bound {floor}",
        )
    s1_sq = spectrum.sigma_max**2
    lam_lower = epsilon + s1_sq - (limit - delta_3k) * (epsilon + s1_sq) / s1_sq
    lam_upper = epsilon + spectrum.sigma_min**2
    return ParameterWindow(
        algorithm=algorithm,
        epsilon_lower=floor,
        epsilon=float(epsilon),
        lambda_lower=lam_lower,
        lambda_upper=lam_upper,
    )


def advise_nsiht(spectrum: Spectrum, delta_3k: float, epsilon: float | None = None) -> ParameterWindow:
    """Parameter window under which NSIHT contracts geometrically.

    Requires ``delta_3k < 1/sqrt(3)``. When ``epsilon`` is omitted, twice
    the lower bound is chosen; any value above the bound yields a nonempty
    stepsize interval.
    """
    return _advise("nsiht", spectrum, delta_3k, epsilon)


def advise_nshtp(spectrum: Spectrum, delta_3k: float, epsilon: float | None = None) -> ParameterWindow:
    """Parameter window for NSHTP; as :func:`advise_nsiht` with limit 1/2."""
    return _advise("nshtp", spectrum, delta_3k, epsilon)


def equal_step_epsilon_lower(spectrum: Spectrum, delta_3k: float) -> float:
    """Exclusive ridge lower bound for NSIHT run with stepsize equal to the ridge.

    Returns ``inf`` when ``delta_3k`` is not below the NSIHT limit.
    """
    if delta_3k >= NSIHT_DELTA_LIMIT:
        return math.inf
    s1_sq = spectrum.sigma_max**2
    return max(s1_sq, (s1_sq / (NSIHT_DELTA_LIMIT - delta_3k) - 1.0) * s1_sq)


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Issued contraction factor and noise amplification for a parameter choice."""

    algorithm: str
    rho: float
    tau: float
    sigma_max: float
    sigma_min: float
    delta_k: float
    delta_2k: float
    delta_3k: float
    epsilon: float
    lam: float


@dataclass(frozen=True)
class Refusal:
    """A declined certification, naming the violated condition."""

    reason: str


def certify(
    algorithm: str,
    spectrum: Spectrum,
    deltas: tuple[float, float, float],
    epsilon: float,
    lam: float,
) -> ConvergenceCertificate | Refusal:
    """Evaluate the convergence guarantee for concrete parameters.

    ``deltas`` are the order k, 2k, 3k constants. Every hypothesis is
    checked; the first violated one is reported as a :class:`Refusal`.
    """
    if algorithm not in _DELTA_LIMITS:
        raise ValueError(f"algorithm must be one of {tuple(_DELTA_LIMITS)}, got {algorithm!r}")
    delta_k, delta_2k, delta_3k = (float(d) for d in deltas)
    if not 0.0 <= delta_k <= delta_2k <= delta_3k:
        return Refusal(
            f"inconsistent constants: need 0 <= delta_k <= delta_2k <= delta_3k, "
            f"got ({delta_k}, {delta_2k}, {delta_3k})"
        )
    if not lam > 0:
        return Refusal(f"stepsize must be positive, got {lam}")
    window = _advise(algorithm, spectrum, delta_3k, epsilon)
    if window.reason is not None:
        return Refusal(window.reason)
    if not window.contains(lam):
        return Refusal(
            f"lam = {lam} outside the admissible interval "
            f"({window.lambda_lower}, {window.lambda_upper}]"
        )
    s1 = spectrum.sigma_max
    s1_sq = s1**2
    gap = delta_3k + s1_sq - lam * s1_sq / (epsilon + s1_sq)
    if algorithm == "nsiht":
        rho = math.sqrt(3.0) * gap
        if rho >= 1.0:
            return Refusal(f"contraction factor {rho} is not below 1")
        tau = math.sqrt(3.0) * lam * s1 / ((epsilon + s1_sq) * (1.0 - rho))
    else:
        shrink = math.sqrt(1.0 - delta_2k**2)
        rho = math.sqrt(3.0) * gap / shrink
        if rho >= 1.0:
            return Refusal(f"contraction factor {rho} is not below 1")
        tau = (
            math.sqrt(3.0) * lam * s1 / (shrink * (epsilon + s1_sq))
            + math.sqrt(1.0 + delta_k) / (1.0 - delta_2k)
        ) / (1.0 - rho)
    return ConvergenceCertificate(
        algorithm=algorithm,
        rho=rho,
        tau=tau,
        sigma_max=s1,
        sigma_min=spectrum.sigma_min,
        delta_k=delta_k,
        delta_2k=delta_2k,
        delta_3k=delta_3k,
        epsilon=float(epsilon),
        lam=float(lam),
    )
