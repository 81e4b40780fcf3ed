"""Experiment harness: residual traces, phase transitions, sweeps, noisy runs.

Every experiment is described by an :class:`ExperimentSpec` and produces
an :class:`ExperimentReport` that serializes to a CSV body plus a JSON
sidecar carrying provenance (spec echo, toolkit version, timestamp).
CSV bodies are byte-identical across reruns and worker counts: per-trial
seeds are derived by hashing the master seed with the problem coordinates
and trial index, results are reduced in canonical grid order, and floats
are written with shortest round-trip formatting.

The per-trial hash covers only (m, n, k, trial), not the solver settings,
so every algorithm, parameter pair, and iteration budget in a grid sees
the same problem instances, and adding grid cells never perturbs the
problems of existing ones.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from itertools import product
from pathlib import Path

from nsht import __version__
from nsht.problems import NOISE_MODE_STD, RngStream, make_problem
from nsht.solvers import (
    ALGORITHMS,
    STATUS_NUMERIC,
    STOP_BUDGET,
    STOP_RELATIVE_ERROR,
    SolverConfig,
    solve,
)

KIND_TRACE = "residual-trace"
KIND_PHASE = "phase-transition"
KIND_SWEEP = "parameter-sweep"
KIND_NOISY = "noisy-recovery"
KIND_CERTIFY = "certify"
KINDS = (KIND_TRACE, KIND_PHASE, KIND_SWEEP, KIND_NOISY, KIND_CERTIFY)

TRACE_HEADER = "algorithm,iteration,residual"
GRID_HEADER = (
    "m,n,k,algorithm,epsilon,lambda,iters,trials,successes,rate,"
    "mean_iters_success,failures_numeric"
)
TRACE_SCHEMA = "nsht/trace/v1"
GRID_SCHEMA = "nsht/grid/v1"

PRESETS = {
    "desk": {"m": 100, "n": 200, "trials": 100},
    "paper": {"m": 500, "n": 1000, "trials": 250},
}
DEFAULT_KN_GRID = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30)


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of one experiment grid.

    The grid is the product sizes x ks x algorithms x params x budgets;
    ``params`` are (epsilon, lam) pairs and ``budgets`` iteration limits.
    """

    kind: str
    sizes: tuple[tuple[int, int], ...]
    ks: tuple[int, ...]
    algorithms: tuple[str, ...] = ("nsiht", "nshtp")
    params: tuple[tuple[float, float], ...] = ((1.0, 1.0),)
    budgets: tuple[int, ...] = (50,)
    trials: int = 100
    tolerance: float = 1e-3
    noise_scale: float = 0.0
    noise_mode: str = NOISE_MODE_STD
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple((int(m), int(n)) for m, n in self.sizes))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(
            self, "params", tuple((float(e), float(l)) for e, l in self.params)
        )
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not (self.sizes and self.ks and self.algorithms and self.params and self.budgets):
            raise ValueError("grids must be nonempty")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
        for b in self.budgets:
            if b < 1:
                raise ValueError("iteration budgets must be at least 1")
        for (_, n), k in product(self.sizes, self.ks):
            if not 1 <= k < n:
                raise ValueError(f"need 1 <= k < n for every cell, got k={k}, n={n}")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")

    def to_jsonable(self) -> dict:
        return asdict(self)

    @classmethod
    def from_jsonable(cls, raw: dict) -> "ExperimentSpec":
        raw = dict(raw)
        if "sizes" in raw:
            raw["sizes"] = tuple(tuple(size) for size in raw["sizes"])
        if "params" in raw:
            raw["params"] = tuple(tuple(pair) for pair in raw["params"])
        for key in ("ks", "algorithms", "budgets"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass(frozen=True)
class CellResult:
    m: int
    n: int
    k: int
    algorithm: str
    epsilon: float
    lam: float
    iters: int
    trials: int
    successes: int
    rate: float
    mean_iters_success: float
    failures_numeric: int


@dataclass(frozen=True)
class TraceRow:
    algorithm: str
    iteration: int
    residual: float


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    cells: list[CellResult] = field(default_factory=list)
    traces: list[TraceRow] = field(default_factory=list)
    statuses: dict[str, str] = field(default_factory=dict)
    version: str = __version__
    created: str = ""

    def csv_body(self) -> str:
        if self.spec.kind == KIND_TRACE:
            lines = [TRACE_HEADER]
            lines += [
                f"{t.algorithm},{t.iteration},{_fmt(t.residual)}" for t in self.traces
            ]
        else:
            lines = [GRID_HEADER]
            lines += [
                f"{c.m},{c.n},{c.k},{c.algorithm},{_fmt(c.epsilon)},{_fmt(c.lam)},"
                f"{c.iters},{c.trials},{c.successes},{_fmt(c.rate)},"
                f"{_fmt(c.mean_iters_success)},{c.failures_numeric}"
                for c in self.cells
            ]
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        return {
            "schema": TRACE_SCHEMA if self.spec.kind == KIND_TRACE else GRID_SCHEMA,
            "toolkit_version": self.version,
            "created": self.created,
            "seed": self.spec.seed,
            "spec": self.spec.to_jsonable(),
            "statuses": self.statuses,
        }

    def write(self, csv_path) -> None:
        csv_path = Path(csv_path)
        csv_path.write_text(self.csv_body())
        csv_path.with_suffix(".json").write_text(
            json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n"
        )


def _fmt(x: float) -> str:
    return repr(float(x))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def trial_stream_id(m: int, n: int, k: int, trial: int) -> int:
    """Stable 64-bit stream id for one problem instance of a grid."""
    payload = f"{m}:{n}:{k}:{trial}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def trial_problem(spec: ExperimentSpec, m: int, n: int, k: int, trial: int):
    """The problem a given grid trial solves; shared across solver settings."""
    stream = RngStream(spec.seed, trial_stream_id(m, n, k, trial))
    return make_problem(m, n, k, spec.noise_scale, stream, spec.noise_mode)


def _solve_trial_block(spec: ExperimentSpec, m: int, n: int, k: int, trial: int) -> dict:
    problem = trial_problem(spec, m, n, k, trial)
    block = {}
    for algo, (eps, lam), budget in product(spec.algorithms, spec.params, spec.budgets):
        config = SolverConfig(
            algorithm=algo,
            k=k,
            epsilon=eps,
            lam=lam,
            max_iterations=budget,
            tolerance=spec.tolerance,
            stop_rule=STOP_RELATIVE_ERROR,
        )
        result = solve(problem, config)
        block[(algo, eps, lam, budget)] = (
            result.success,
            result.iterations_used,
            result.trace.status == STATUS_NUMERIC,
        )
    return block


def _run_grid(spec: ExperimentSpec, workers: int) -> ExperimentReport:
    coords = list(product(spec.sizes, spec.ks))
    items = [(m, n, k, t) for (m, n), k in coords for t in range(spec.trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = dict(
                zip(items, pool.map(lambda it: _solve_trial_block(spec, *it), items))
            )
    else:
        blocks = {it: _solve_trial_block(spec, *it) for it in items}

    cells = []
    for (m, n), k, algo, (eps, lam), budget in product(
        spec.sizes, spec.ks, spec.algorithms, spec.params, spec.budgets
    ):
        successes = 0
        numeric = 0
        success_iters = 0
        for trial in range(spec.trials):
            ok, iters, failed = blocks[(m, n, k, trial)][(algo, eps, lam, budget)]
            if ok:
                successes += 1
                success_iters += iters
            if failed:
                numeric += 1
        cells.append(
            CellResult(
                m=m,
                n=n,
                k=k,
                algorithm=algo,
                epsilon=eps,
                lam=lam,
                iters=budget,
                trials=spec.trials,
                successes=successes,
                rate=successes / spec.trials,
                mean_iters_success=success_iters / successes if successes else math.nan,
                failures_numeric=numeric,
            )
        )
    return ExperimentReport(spec=spec, cells=cells, created=_now())


def run_phase_transition(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Success rates over a (size, sparsity) grid, one seeded problem per trial."""
    if spec.kind != KIND_PHASE:
        raise ValueError(f"expected kind {KIND_PHASE!r}, got {spec.kind!r}")
    return _run_grid(spec, workers)


def run_parameter_sweep(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Same machinery as the phase transition, sweeping (epsilon, lam) pairs."""
    if spec.kind != KIND_SWEEP:
        raise ValueError(f"expected kind {KIND_SWEEP!r}, got {spec.kind!r}")
    return _run_grid(spec, workers)


def run_noisy_recovery(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Recovery from inexact measurements, judged against the noiseless truth."""
    if spec.kind != KIND_NOISY:
        raise ValueError(f"expected kind {KIND_NOISY!r}, got {spec.kind!r}")
    return _run_grid(spec, workers)


def run_residual_trace(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Residual per iteration for each algorithm on one shared problem instance.

    The solvers run their full iteration budget (no early stop) so the
    curves show the complete residual trajectory; a run that degenerates
    numerically simply truncates, recorded in the sidecar statuses.
    """
    if spec.kind != KIND_TRACE:
        raise ValueError(f"expected kind {KIND_TRACE!r}, got {spec.kind!r}")
    if len(spec.sizes) != 1 or len(spec.ks) != 1 or len(spec.params) != 1 or len(spec.budgets) != 1:
        raise ValueError("residual traces use a single problem cell")
    (m, n), k = spec.sizes[0], spec.ks[0]
    eps, lam = spec.params[0]
    problem = trial_problem(spec, m, n, k, trial=0)
    rows: list[TraceRow] = []
    statuses: dict[str, str] = {}
    for algo in spec.algorithms:
        config = SolverConfig(
            algorithm=algo,
            k=k,
            epsilon=eps,
            lam=lam,
            max_iterations=spec.budgets[0],
            tolerance=spec.tolerance,
            stop_rule=STOP_BUDGET,
        )
        result = solve(problem, config)
        statuses[algo] = result.trace.status
        rows += [
            TraceRow(algorithm=algo, iteration=rec.iteration, residual=rec.residual)
            for rec in result.trace.records
        ]
    return ExperimentReport(spec=spec, traces=rows, statuses=statuses, created=_now())


RUNNERS = {
    KIND_TRACE: run_residual_trace,
    KIND_PHASE: run_phase_transition,
    KIND_SWEEP: run_parameter_sweep,
    KIND_NOISY: run_noisy_recovery,
}


def run(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Dispatch a spec to its runner."""
    try:
        runner = RUNNERS[spec.kind]
    except KeyError:
        raise ValueError(f"no runner for kind {spec.kind!r}") from None
    return runner(spec, workers=workers)
