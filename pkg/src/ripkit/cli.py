"""Command-line front end.

Exit codes: 0 success, 1 assertion/condition failure, 2 usage error,
3 enumeration budget exceeded. The env var RIPKIT_BUDGET overrides the
default enumeration budget for every subcommand.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .conditions import check_delta_theta_condition, check_delta_threshold
from .counterexample import build_instance, verify_instance
from .errors import (
    BudgetExceededError,
    PreconditionError,
    RipkitError,
    SoundnessError,
    VerificationError,
)
from .experiments import ExperimentConfig, run_experiment_to_dir
from .matrices import matrix_to_csv_text, read_matrix_csv, write_matrix_csv
from .norms import extremal_vector, norm_gap
from .rip import RipProfile, audit_inequalities
from .rng import CounterRng, derive_seed
from .solvers import (
    DantzigBoxConstraint,
    EqualityConstraint,
    L2BallConstraint,
    RecoveryProblem,
    solve_problem,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

_SOLVER_CONSTRAINTS = {
    "bp": EqualityConstraint,
    "bpdn": L2BallConstraint,
    "ds": DantzigBoxConstraint,
}


def _env_budget() -> int | None:
    raw = os.environ.get("RIPKIT_BUDGET")
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise PreconditionError(f"RIPKIT_BUDGET must be an integer, got {raw!r}") from exc
    if value < 1:
        raise PreconditionError(f"RIPKIT_BUDGET must be positive, got {value}")
    return value


def cmd_rip(args) -> int:
    matrix = read_matrix_csv(args.matrix)
    budget = _env_budget()
    profile = RipProfile(matrix, budget=budget)
    if args.k is None and args.theta is None and args.audit is None:
        raise PreconditionError("nothing to do: pass --k, --theta, and/or --audit")
    for k in args.k or []:
        value, witness = profile.delta(k)
        print(f"delta[{k}] = {value!r}  witness={list(witness)}")
    for ka, kb in args.theta or []:
        value, wa, wb = profile.theta(ka, kb)
        print(f"theta[{ka},{kb}] = {value!r}  witnessA={list(wa)} witnessB={list(wb)}")
    exit_code = EXIT_OK
    if args.audit is not None:
        report = audit_inequalities(profile, args.audit, budget=budget)
        print(report.to_csv(), end="")
        if not report.all_hold:
            exit_code = EXIT_FAILURE
    if args.json is not None:
        with open(args.json, "w", encoding="ascii") as fh:
            fh.write(profile.to_json(indent=2))
            fh.write("\n")
    return exit_code


def cmd_recover(args) -> int:
    with open(args.problem, "r", encoding="ascii") as fh:
        text = fh.read()
    problem = RecoveryProblem.from_json(text, base_dir=os.path.dirname(os.path.abspath(args.problem)))
    if args.solver is not None:
        expected = _SOLVER_CONSTRAINTS[args.solver]
        if not isinstance(problem.constraint, expected):
            raise PreconditionError(
                f"--solver {args.solver} does not match the problem constraint "
                f"{problem.constraint.type!r}"
            )
    solution = solve_problem(problem)
    print(solution.to_json(indent=2))
    if not args.check_conditions:
        return EXIT_OK

    doc = json.loads(text)
    beta_true = doc.get("beta_true")
    budget = _env_budget()
    profile = RipProfile(problem.phi, budget=budget)
    if beta_true is not None:
        truth = np.asarray(beta_true, dtype=np.float64)
        k = int(np.count_nonzero(truth))
    else:
        truth = None
        k = int(np.count_nonzero(np.abs(solution.beta_hat) > 1e-8))
    k = max(k, 2)
    epsilon = 0.0
    if isinstance(problem.constraint, L2BallConstraint):
        epsilon = float(problem.constraint.epsilon)
    threshold_report = check_delta_threshold(profile.delta(k)[0], k, epsilon)
    reports = [threshold_report]
    if 2 * k <= problem.phi.shape[1]:
        reports.append(check_delta_theta_condition(profile, k, k, k))
    for report in reports:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if truth is None or not threshold_report.holds:
        return EXIT_OK
    # with the true signal present, a held condition's bound is checkable:
    # a breach means an implementation bug, reported via exit code 1
    error = float(np.linalg.norm(solution.beta_hat - truth))
    coeff = threshold_report.error_bound_coefficient
    if isinstance(problem.constraint, EqualityConstraint):
        bound, breach = 0.0, error > 1e-6
    elif isinstance(problem.constraint, L2BallConstraint):
        bound = epsilon * coeff
        breach = error > bound + 1e-9
    else:
        bound = np.sqrt(k) * float(problem.constraint.lam) * coeff
        breach = error > bound + 1e-9
    if breach:
        print(
            f"soundness breach: error {error!r} exceeds certified bound {bound!r}",
            file=sys.stderr,
        )
        return EXIT_FAILURE
    return EXIT_OK


def cmd_counterexample(args) -> int:
    budget = _env_budget()
    instance = build_instance(args.k)
    report = verify_instance(args.k, budget=budget)
    doc = {
        "k": instance.k,
        "delta_claimed": instance.delta_claimed,
        "beta1": [float(v) for v in instance.beta1],
        "beta2": [float(v) for v in instance.beta2],
        "verification": report.to_dict(),
    }
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        write_matrix_csv(os.path.join(args.out, f"phi_k{instance.k}.csv"), instance.phi.array)
        doc["matrix_csv"] = f"phi_k{instance.k}.csv"
        with open(os.path.join(args.out, f"instance_k{instance.k}.json"), "w", encoding="ascii") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote phi_k{instance.k}.csv and instance_k{instance.k}.json to {args.out}")
    else:
        doc["matrix_csv"] = matrix_to_csv_text(instance.phi.array)
        print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.config, "r", encoding="ascii") as fh:
        config = ExperimentConfig.from_json(fh.read())
    if _env_budget() is not None and config.budget is None:
        config = ExperimentConfig(**{**config.to_dict(), "budget": _env_budget()})
    out_dir = args.out if args.out is not None else os.getcwd()
    records = run_experiment_to_dir(config, out_dir)
    successes = sum(1 for r in records if r.success)
    print(
        f"trials={len(records)} successes={successes} "
        f"records={os.path.join(out_dir, 'records.jsonl')}"
    )
    return EXIT_OK


def _parse_dims(text: str) -> list[int]:
    dims: list[int] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if "-" in chunk:
            lo, hi = chunk.split("-", 1)
            dims.extend(range(int(lo), int(hi) + 1))
        elif chunk:
            dims.append(int(chunk))
    if not dims or min(dims) < 1:
        raise PreconditionError(f"bad dims spec {text!r}")
    return dims


def cmd_verify_norms(args) -> int:
    dims = _parse_dims(args.dims)
    rng = CounterRng(args.seed)
    violations = 0
    checked = 0
    for trial in range(args.trials):
        n = dims[int(rng.integers_below([len(dims)])[0])]
        x = rng.normal(n)
        report = norm_gap(x)
        checked += 1
        if not report.holds:
            violations += 1
    equality_misses = 0
    for m in range(1, 9):
        sub = CounterRng(derive_seed(args.seed, m))
        positions = sub.subset(4 * m, m)
        magnitude = 0.5 + 2.0 * float(sub.uniform(1)[0])
        report = norm_gap(extremal_vector(m, magnitude, positions))
        if not report.equality:
            equality_misses += 1
    print(
        f"trials={checked} violations={violations} "
        f"extremal_constructions=8 equality_misses={equality_misses}"
    )
    return EXIT_OK if violations == 0 and equality_misses == 0 else EXIT_FAILURE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ripkit",
        description=(
            "Exact restricted-isometry constants, l1-minimization recovery, "
            "and sparse-recovery condition audits for explicit matrices."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rip = sub.add_parser("rip", help="exact delta/theta constants and inequality audits")
    rip.add_argument("matrix", help="matrix CSV file (header 'rows,cols')")
    rip.add_argument("--k", type=int, action="append", metavar="K",
                     help="compute delta(K); repeatable")
    rip.add_argument("--theta", type=int, nargs=2, action="append",
                     metavar=("K", "K2"), help="compute theta(K, K2); repeatable")
    rip.add_argument("--audit", type=int, metavar="KMAX",
                     help="audit all inequalities up to total sparsity KMAX (CSV to stdout)")
    rip.add_argument("--json", metavar="PATH", help="write the profile JSON to PATH")
    rip.set_defaults(func=cmd_rip)

    recover = sub.add_parser("recover", help="solve one recovery problem JSON")
    recover.add_argument("problem", help="problem JSON file")
    recover.add_argument("--solver", choices=sorted(_SOLVER_CONSTRAINTS),
                         help="require this program (must match the problem constraint)")
    recover.add_argument("--check-conditions", action="store_true",
                         help="also evaluate recovery conditions from exact constants")
    recover.set_defaults(func=cmd_recover)

    counter = sub.add_parser("counterexample", help="build and verify a family instance")
    counter.add_argument("--k", type=int, required=True, help="sparsity order (>= 1)")
    counter.add_argument("--out", metavar="DIR", help="write phi CSV + instance JSON here")
    counter.set_defaults(func=cmd_counterexample)

    experiment = sub.add_parser("experiment", help="run a seeded recovery experiment config")
    experiment.add_argument("config", help="experiment config JSON file")
    experiment.add_argument("--out", metavar="DIR", help="output directory (default: cwd)")
    experiment.set_defaults(func=cmd_experiment)

    norms = sub.add_parser("verify-norms", help="property-check the norm-gap inequality")
    norms.add_argument("--trials", type=int, default=10000)
    norms.add_argument("--dims", default="1-64", help="dims like '1-64' or '2,4,8'")
    norms.add_argument("--seed", type=int, default=0)
    norms.set_defaults(func=cmd_verify_norms)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc} (required={exc.required})", file=sys.stderr)
        return EXIT_BUDGET
    except (VerificationError, SoundnessError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except PreconditionError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"usage error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RipkitError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
