"""Reproducible recovery experiments: seeded trials, soundness gating,
and deterministic persistence.

A config (JSON) fully determines every trial through counter-derived
seeds, so reruns regenerate `records.jsonl` byte-for-byte. Whenever a
trial has its exact restricted isometry constant computed and that
constant certifies recovery (delta_k < 0.307, k > 1), the recorded
error must satisfy the certified bound; a violation aborts the run with
SoundnessError because it can only mean an implementation bug.

Record lines are canonical JSON (sorted keys, no whitespace). Wall time
lives in the summary, never in the records, to keep them byte-stable.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conditions import DELTA_THRESHOLD
from .ensembles import (
    MATRIX_KINDS,
    NORMALIZATIONS,
    SIGNAL_LAWS,
    EnsembleSpec,
    generate_matrix,
    generate_sparse_signal,
)
from .errors import BudgetExceededError, PreconditionError, SoundnessError
from .rip import delta_exact
from .rng import CounterRng, derive_seed
from .solvers import (
    EqualityConstraint,
    L2BallConstraint,
    basis_pursuit,
    bpdn,
    constraint_from_dict,
    constraint_to_dict,
    dantzig_selector,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "run_recovery_experiment",
    "records_to_jsonl",
    "write_records_jsonl",
    "summary_csv_text",
    "write_summary_csv",
    "run_experiment_to_dir",
    "PhaseGrid",
    "phase_diagram",
]

BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: str
    n: int
    p: int
    k: int
    constraint: dict
    trials: int
    master_seed: int
    compute_exact_rip: bool = True
    success_threshold: float = 1e-6
    signal_law: str = "rademacher"
    column_normalization: str = "unit_l2"
    budget: int | None = None

    def __post_init__(self):
        if self.ensemble not in MATRIX_KINDS:
            raise PreconditionError(f"unknown ensemble {self.ensemble!r}")
        if self.signal_law not in SIGNAL_LAWS:
            raise PreconditionError(f"unknown signal law {self.signal_law!r}")
        if self.column_normalization not in NORMALIZATIONS:
            raise PreconditionError(
                f"unknown normalization {self.column_normalization!r}"
            )
        if not (1 <= int(self.k) <= int(self.p)):
            raise PreconditionError(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        if int(self.trials) < 1:
            raise PreconditionError(f"need trials >= 1, got {self.trials}")
        if float(self.success_threshold) <= 0.0:
            raise PreconditionError("success_threshold must be positive")
        constraint_from_dict(self.constraint)  # validates shape

    def to_dict(self) -> dict:
        return {
            "ensemble": self.ensemble,
            "n": int(self.n),
            "p": int(self.p),
            "k": int(self.k),
            "constraint": constraint_to_dict(constraint_from_dict(self.constraint)),
            "trials": int(self.trials),
            "master_seed": int(self.master_seed),
            "compute_exact_rip": bool(self.compute_exact_rip),
            "success_threshold": float(self.success_threshold),
            "signal_law": self.signal_law,
            "column_normalization": self.column_normalization,
            "budget": self.budget if self.budget is None else int(self.budget),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        known = {
            "ensemble", "n", "p", "k", "constraint", "trials", "master_seed",
            "compute_exact_rip", "success_threshold", "signal_law",
            "column_normalization", "budget",
        }
        unknown = set(doc) - known
        if unknown:
            raise PreconditionError(f"unknown config fields: {sorted(unknown)}")
        required = {"ensemble", "n", "p", "k", "constraint", "trials", "master_seed"}
        missing = required - set(doc)
        if missing:
            raise PreconditionError(f"missing config fields: {sorted(missing)}")
        return cls(**doc)


@dataclass(frozen=True)
class ExperimentRecord:
    """One trial's outcome; everything needed to re-audit it offline."""

    config_hash: str
    trial: int
    seed: int
    n: int
    p: int
    k: int
    delta_k: float | None
    theta_k_k: float | None
    budget_error: str | None
    error: float
    success: bool
    bound: float | None
    bound_satisfied: bool | None
    objective: float
    residual: float
    kkt_gap: float
    iterations: int
    converged: bool
    nonunique_flag: bool

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "trial": self.trial,
            "seed": self.seed,
            "n": self.n,
            "p": self.p,
            "k": self.k,
            "delta_k": self.delta_k,
            "theta_k_k": self.theta_k_k,
            "budget_error": self.budget_error,
            "error": self.error,
            "success": self.success,
            "bound": self.bound,
            "bound_satisfied": self.bound_satisfied,
            "objective": self.objective,
            "residual": self.residual,
            "kkt_gap": self.kkt_gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "nonunique_flag": self.nonunique_flag,
        }


def _trial_noise(rng: CounterRng, phi: np.ndarray, constraint) -> np.ndarray:
    """Noise tight against the constraint: the l2 ball draw has norm
    exactly epsilon, the correlation-box draw has ||Phi' z||_inf exactly
    lambda, so recorded bounds are exercised at their sharpest."""
    n = phi.shape[0]
    if isinstance(constraint, EqualityConstraint):
        return np.zeros(n)
    raw = rng.normal(n)
    if isinstance(constraint, L2BallConstraint):
        eps = float(constraint.epsilon)
        nrm = float(np.linalg.norm(raw))
        return raw * (eps / nrm) if eps > 0.0 and nrm > 0.0 else np.zeros(n)
    lam = float(constraint.lam)
    corr = float(np.max(np.abs(phi.T @ raw)))
    return raw * (lam / corr) if lam > 0.0 and corr > 0.0 else np.zeros(n)


def _run_trial(config: ExperimentConfig, trial: int) -> ExperimentRecord:
    seed = derive_seed(config.master_seed, trial)
    spec = EnsembleSpec(
        kind=config.ensemble,
        n=config.n,
        p=config.p,
        column_normalization=config.column_normalization,
        seed=derive_seed(seed, 0),
    )
    phi = generate_matrix(spec)
    beta = generate_sparse_signal(config.p, config.k, config.signal_law, derive_seed(seed, 1))
    constraint = constraint_from_dict(config.constraint)
    noise = _trial_noise(CounterRng(derive_seed(seed, 2)), phi.array, constraint)
    y = phi.array @ beta + noise

    if isinstance(constraint, EqualityConstraint):
        solution = basis_pursuit(phi, y)
    elif isinstance(constraint, L2BallConstraint):
        solution = bpdn(phi, y, constraint.epsilon)
    else:
        solution = dantzig_selector(phi, y, constraint.lam)

    error = float(np.linalg.norm(solution.beta_hat - beta))
    success = bool(error <= config.success_threshold)

    delta_value: float | None = None
    budget_error: str | None = None
    if config.compute_exact_rip:
        try:
            delta_value = delta_exact(phi, config.k, budget=config.budget)[0]
        except BudgetExceededError as exc:
            budget_error = str(exc)

    bound: float | None = None
    bound_satisfied: bool | None = None
    certified = (
        delta_value is not None
        and delta_value < DELTA_THRESHOLD
        and config.k > 1
    )
    if certified:
        margin = DELTA_THRESHOLD - delta_value
        if isinstance(constraint, EqualityConstraint):
            bound_satisfied = success
        elif isinstance(constraint, L2BallConstraint):
            bound = float(constraint.epsilon) / margin
            bound_satisfied = bool(error <= bound + BOUND_SLACK)
        else:
            bound = math.sqrt(config.k) * float(constraint.lam) / margin
            bound_satisfied = bool(error <= bound + BOUND_SLACK)
        if not bound_satisfied:
            raise SoundnessError(
                f"certified bound violated at trial {trial}: "
                f"delta_{config.k} = {delta_value:.6g} < {DELTA_THRESHOLD}, "
                f"error = {error:.6g}, bound = {bound!r}"
            )

    return ExperimentRecord(
        config_hash=config.config_hash,
        trial=trial,
        seed=seed,
        n=config.n,
        p=config.p,
        k=config.k,
        delta_k=delta_value,
        theta_k_k=None,
        budget_error=budget_error,
        error=error,
        success=success,
        bound=bound,
        bound_satisfied=bound_satisfied,
        objective=solution.objective,
        residual=solution.residual,
        kkt_gap=solution.kkt_gap,
        iterations=solution.iterations,
        converged=solution.converged,
        nonunique_flag=solution.nonunique_flag,
    )


def run_recovery_experiment(config: ExperimentConfig) -> list[ExperimentRecord]:
    """All trials of the config, in trial order; fails loudly on any
    certified-bound violation (SoundnessError). BudgetExceeded from the
    constant enumeration is recorded per-trial instead of raised."""
    return [_run_trial(config, t) for t in range(config.trials)]


def records_to_jsonl(records: Sequence[ExperimentRecord]) -> str:
    lines = [
        json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":"))
        for r in records
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def write_records_jsonl(records: Sequence[ExperimentRecord], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(records_to_jsonl(records))


def summary_csv_text(records: Sequence[ExperimentRecord], wall_time_ms: float | None = None) -> str:
    trials = len(records)
    successes = sum(1 for r in records if r.success)
    deltas = [r.delta_k for r in records if r.delta_k is not None]
    errors = [r.error for r in records]
    budget_errors = sum(1 for r in records if r.budget_error)
    violations = sum(1 for r in records if r.bound_satisfied is False)
    header = (
        "config_hash,trials,successes,success_rate,mean_error,max_error,"
        "mean_delta,delta_computed,budget_errors,violations,wall_time_ms"
    )
    row = ",".join(
        [
            records[0].config_hash if records else "",
            str(trials),
            str(successes),
            repr(successes / trials) if trials else "",
            repr(sum(errors) / trials) if trials else "",
            repr(max(errors)) if trials else "",
            repr(sum(deltas) / len(deltas)) if deltas else "",
            str(len(deltas)),
            str(budget_errors),
            str(violations),
            repr(float(wall_time_ms)) if wall_time_ms is not None else "",
        ]
    )
    return header + "\n" + row + "\n"


def write_summary_csv(
    records: Sequence[ExperimentRecord],
    path: str | os.PathLike,
    wall_time_ms: float | None = None,
) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(summary_csv_text(records, wall_time_ms))


def run_experiment_to_dir(config: ExperimentConfig, out_dir: str | os.PathLike) -> list[ExperimentRecord]:
    """Run the config and persist records.jsonl, summary.csv, and
    run_meta.json under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    started = time.perf_counter()
    records = run_recovery_experiment(config)
    elapsed_ms = (time.perf_counter() - started) * 1e3
    write_records_jsonl(records, os.path.join(out_dir, "records.jsonl"))
    write_summary_csv(records, os.path.join(out_dir, "summary.csv"), elapsed_ms)
    meta = {
        "config": config.to_dict(),
        "config_hash": config.config_hash,
        "wall_time_ms": elapsed_ms,
    }
    with open(os.path.join(out_dir, "run_meta.json"), "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return records


@dataclass(frozen=True)
class PhaseGrid:
    """Cross product of (n, p, k) cells sharing one ensemble and
    constraint; each cell runs trials under its own derived seed."""

    ensemble: str
    constraint: dict
    n_values: tuple[int, ...]
    p_values: tuple[int, ...]
    k_values: tuple[int, ...]
    trials_per_cell: int
    master_seed: int
    compute_exact_rip: bool = True
    success_threshold: float = 1e-6
    signal_law: str = "rademacher"
    column_normalization: str = "unit_l2"
    budget: int | None = None

    @classmethod
    def from_json(cls, text: str) -> "PhaseGrid":
        doc = json.loads(text)
        for key in ("n_values", "p_values", "k_values"):
            doc[key] = tuple(int(v) for v in doc[key])
        return cls(**doc)


def phase_diagram(grid: PhaseGrid) -> str:
    """Long-format CSV over the grid: one row per feasible (n, p, k)
    cell with success counts and the mean measured constant."""
    lines = ["n,p,k,trials,successes,success_rate,mean_delta,delta_computed,budget_errors"]
    cells = [
        (n, p, k)
        for n, p, k in itertools.product(grid.n_values, grid.p_values, grid.k_values)
        if 1 <= k <= p
    ]
    for index, (n, p, k) in enumerate(cells):
        config = ExperimentConfig(
            ensemble=grid.ensemble,
            n=n,
            p=p,
            k=k,
            constraint=grid.constraint,
            trials=grid.trials_per_cell,
            master_seed=derive_seed(grid.master_seed, index),
            compute_exact_rip=grid.compute_exact_rip,
            success_threshold=grid.success_threshold,
            signal_law=grid.signal_law,
            column_normalization=grid.column_normalization,
            budget=grid.budget,
        )
        records = run_recovery_experiment(config)
        successes = sum(1 for r in records if r.success)
        deltas = [r.delta_k for r in records if r.delta_k is not None]
        budget_errors = sum(1 for r in records if r.budget_error)
        lines.append(
            ",".join(
                [
                    str(n), str(p), str(k), str(len(records)), str(successes),
                    repr(successes / len(records)),
                    repr(sum(deltas) / len(deltas)) if deltas else "",
                    str(len(deltas)),
                    str(budget_errors),
                ]
            )
        )
    return "\n".join(lines) + "\n"
