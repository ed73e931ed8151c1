"""l1-minimization solvers for the three recovery programs, plus the
exhaustive l0 oracle.

All three programs minimize ||x||_1 over a convex feasible set:

* equality:      Phi x = y            (noiseless basis pursuit)
* l2 ball:       ||Phi x - y||_2 <= epsilon
* correlation:   ||Phi'(y - Phi x)||_inf <= lambda

One operator-splitting (alternating-direction) engine covers all three;
only the projection of the residual copy differs. The correlation-box
program is rewritten over A = Phi' Phi, b = Phi' y so its constraint is
also a simple projection. Every solve returns a dual certificate and a
KKT gap so optimality is checkable without trusting the iteration.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    BudgetExceededError,
    InfeasibleError,
    PreconditionError,
)
from .matrices import as_sensing_matrix, matrix_from_csv_text

__all__ = [
    "EqualityConstraint",
    "L2BallConstraint",
    "DantzigBoxConstraint",
    "RecoveryProblem",
    "RecoverySolution",
    "basis_pursuit",
    "bpdn",
    "dantzig_selector",
    "solve_problem",
    "l0_oracle",
    "l0_solutions",
]

DEFAULT_GAP_TOL = 1e-7
DEFAULT_RESIDUAL_TOL = 1e-9
DEFAULT_EQ_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
SUPPORT_RTOL = 1e-6
NONUNIQUE_MARGIN = 1e-7


@dataclass(frozen=True)
class EqualityConstraint:
    """Phi x = y up to the solver's numerical equality tolerance."""

    type: str = "equality"


@dataclass(frozen=True)
class L2BallConstraint:
    """||Phi x - y||_2 <= epsilon."""

    epsilon: float
    type: str = "l2_ball"

    def __post_init__(self):
        if not (float(self.epsilon) >= 0.0):
            raise PreconditionError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class DantzigBoxConstraint:
    """||Phi'(y - Phi x)||_inf <= lambda."""

    lam: float
    type: str = "dantzig_box"

    def __post_init__(self):
        if not (float(self.lam) >= 0.0):
            raise PreconditionError(f"lambda must be >= 0, got {self.lam}")


Constraint = EqualityConstraint | L2BallConstraint | DantzigBoxConstraint


@dataclass(frozen=True)
class RecoveryProblem:
    phi: np.ndarray
    y: np.ndarray
    constraint: Constraint

    def __post_init__(self):
        mat = as_sensing_matrix(self.phi)
        object.__setattr__(self, "phi", mat.array)
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 1 or y.size != mat.n:
            raise PreconditionError(
                f"y must be a vector of length {mat.n}, got shape {y.shape}"
            )
        if not np.all(np.isfinite(y)):
            raise PreconditionError("y entries must be finite")
        yy = y.copy()
        yy.setflags(write=False)
        object.__setattr__(self, "y", yy)

    @classmethod
    def from_json(cls, text: str, base_dir: str | None = None) -> "RecoveryProblem":
        doc = json.loads(text)
        missing = {"matrix", "y", "constraint"} - set(doc)
        if missing:
            raise PreconditionError(f"missing problem fields: {sorted(missing)}")
        phi = _matrix_from_json_field(doc["matrix"], base_dir)
        constraint = constraint_from_dict(doc["constraint"])
        return cls(phi=phi, y=np.asarray(doc["y"], dtype=np.float64), constraint=constraint)

    def to_json(self) -> str:
        from .matrices import matrix_to_csv_text

        doc = {
            "matrix": matrix_to_csv_text(self.phi),
            "y": [float(v) for v in self.y],
            "constraint": constraint_to_dict(self.constraint),
        }
        return json.dumps(doc, sort_keys=True)


def _matrix_from_json_field(field, base_dir: str | None) -> np.ndarray:
    if isinstance(field, list):
        return np.asarray(field, dtype=np.float64)
    if isinstance(field, str):
        # inline CSV has newlines (header plus rows); a bare path has none
        if "\n" in field.strip():
            return matrix_from_csv_text(field)
        path = field if base_dir is None else os.path.join(base_dir, field)
        from .matrices import read_matrix_csv

        return read_matrix_csv(path)
    raise PreconditionError("matrix field must be inline CSV text, a path, or nested lists")


def constraint_from_dict(doc: dict) -> Constraint:
    kind = str(doc.get("type", "")).lower().replace("-", "_")
    if kind in ("equality", "eq", "bp", "basis_pursuit"):
        return EqualityConstraint()
    if kind in ("l2_ball", "l2ball", "bpdn", "quadratic"):
        return L2BallConstraint(epsilon=float(doc["epsilon"]))
    if kind in ("dantzig_box", "dantzig", "ds", "correlation_box"):
        lam = doc.get("lambda", doc.get("lam"))
        if lam is None:
            raise PreconditionError("dantzig constraint needs a 'lambda' field")
        return DantzigBoxConstraint(lam=float(lam))
    raise PreconditionError(f"unknown constraint type {doc.get('type')!r}")


def constraint_to_dict(c: Constraint) -> dict:
    if isinstance(c, EqualityConstraint):
        return {"type": "equality"}
    if isinstance(c, L2BallConstraint):
        return {"type": "l2_ball", "epsilon": float(c.epsilon)}
    if isinstance(c, DantzigBoxConstraint):
        return {"type": "dantzig_box", "lambda": float(c.lam)}
    raise PreconditionError(f"unknown constraint {c!r}")


@dataclass(frozen=True)
class RecoverySolution:
    """Solver output with its optimality certificate.

    `residual` is the program's own feasibility functional: l2 distance
    of Phi beta_hat from y for the first two programs, the correlation
    sup-norm for the box program. `kkt_gap` is ||beta_hat||_1 minus the
    certified dual lower bound, so a small gap proves near-optimality
    independently of the iteration history. `nonunique_flag` reports a
    dual certificate coordinate at the subgradient boundary off the
    detected support, the signature of a non-unique minimizer.

    `dual_certificate` is the feasibility-scaled dual vector behind
    `kkt_gap` (correlate sup-norm <= 1 by construction), kept on the
    object for independent recomputation; it is not part of the JSON
    schema.
    """

    beta_hat: np.ndarray
    objective: float
    residual: float
    kkt_gap: float
    iterations: int
    converged: bool
    nonunique_flag: bool
    dual_certificate: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "beta_hat": [float(v) for v in self.beta_hat],
            "objective": float(self.objective),
            "residual": float(self.residual),
            "kkt_gap": float(self.kkt_gap),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "nonunique_flag": bool(self.nonunique_flag),
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _soft_threshold(w: np.ndarray, kappa: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - kappa, 0.0)


@dataclass
class _AdmmOutcome:
    x: np.ndarray
    nu: np.ndarray
    iterations: int
    residuals_ok: bool


def _admm_l1(
    a: np.ndarray,
    b: np.ndarray,
    project: Callable[[np.ndarray], np.ndarray],
    residual_tol: float,
    max_iter: int,
) -> _AdmmOutcome:
    """Minimize ||x||_1 subject to (a x - b) in C, with C encoded by the
    Euclidean projection `project`.

    Splitting: minimize ||z||_1 + I_C(v) over x with z = x, v = a x - b.
    Scaled dual variables; the penalty parameter rescales itself by the
    factor-2 rule whenever the primal and dual residuals drift apart by
    more than 10x, but only during a warm-up window: each rescale jolts
    the iteration, and adapting forever can sustain a limit cycle that
    blocks convergence. Returns the last iterate and the unscaled dual
    vector for the residual constraint (the certificate candidate).
    """
    m, p = a.shape
    solve_newton = np.linalg.inv(np.eye(p) + a.T @ a)
    x = np.zeros(p)
    z = np.zeros(p)
    v = project(-b.copy())
    u_z = np.zeros(p)
    u_v = np.zeros(m)
    rho = 1.0
    b_scale = max(1.0, float(np.linalg.norm(b)))
    iterations = 0
    residuals_ok = False
    sqrt_dim = math.sqrt(p + m)
    for it in range(1, max_iter + 1):
        iterations = it
        rhs = (z - u_z) + a.T @ (b + v - u_v)
        x = solve_newton @ rhs
        ax = a @ x
        z_old, v_old = z, v
        z = _soft_threshold(x + u_z, 1.0 / rho)
        v = project(ax - b + u_v)
        u_z = u_z + x - z
        u_v = u_v + ax - b - v
        r_norm = math.hypot(
            float(np.linalg.norm(x - z)), float(np.linalg.norm(ax - b - v))
        )
        s_norm = rho * float(np.linalg.norm((z - z_old) + a.T @ (v - v_old)))
        eps_pri = residual_tol * (sqrt_dim + b_scale + float(np.linalg.norm(x)))
        eps_dual = residual_tol * (
            math.sqrt(p) + rho * float(np.linalg.norm(u_z + a.T @ u_v))
        )
        if r_norm <= eps_pri and s_norm <= eps_dual:
            residuals_ok = True
            break
        if it % 10 == 0 and it <= 1000:
            if r_norm > 10.0 * s_norm and rho < 1e6:
                rho *= 2.0
                u_z /= 2.0
                u_v /= 2.0
            elif s_norm > 10.0 * r_norm and rho > 1e-6:
                rho /= 2.0
                u_z *= 2.0
                u_v *= 2.0
    return _AdmmOutcome(x=x, nu=rho * u_v, iterations=iterations, residuals_ok=residuals_ok)


def _certificate_gap(
    a: np.ndarray,
    b: np.ndarray,
    nu: np.ndarray,
    x: np.ndarray,
    radius: float,
    radius_dual_norm: Callable[[np.ndarray], float],
) -> tuple[float, float, np.ndarray, np.ndarray]:
    """(kkt_gap, dual_objective, scaled correlate a' nu, scaled nu).

    The dual of min ||x||_1 s.t. ax - b in C is
        max -b' nu - sup_{v in C - shift} ...  = -b' nu - radius * ||nu||_*
    over ||a' nu||_inf <= 1, where ||.||_* is the dual of the norm whose
    ball defines C (radius 0 for the equality program). Any nu scaled
    into feasibility gives a true lower bound, hence a one-sided gap.
    """
    g = a.T @ nu
    scale = max(1.0, float(np.max(np.abs(g))) if g.size else 0.0)
    nu_feas = nu / scale
    g_feas = g / scale
    dual_obj = -float(b @ nu_feas) - radius * radius_dual_norm(nu_feas)
    gap = float(np.sum(np.abs(x))) - dual_obj
    return gap, dual_obj, g_feas, nu_feas


def _detect_support(x: np.ndarray) -> np.ndarray:
    top = float(np.max(np.abs(x))) if x.size else 0.0
    if top <= 0.0:
        return np.zeros(x.size, dtype=bool)
    return np.abs(x) > SUPPORT_RTOL * top


def _polish(
    x: np.ndarray,
    phi: np.ndarray,
    y: np.ndarray,
    feasible: Callable[[np.ndarray], bool],
    gap_tol: float,
) -> np.ndarray:
    """Least-squares refit on the detected support, kept only when it
    stays feasible and does not increase the l1 objective."""
    mask = _detect_support(x)
    if not mask.any():
        return x
    refit = np.zeros_like(x)
    sol, *_ = np.linalg.lstsq(phi[:, mask], y, rcond=None)
    refit[mask] = sol
    l1_old = float(np.sum(np.abs(x)))
    l1_new = float(np.sum(np.abs(refit)))
    if l1_new <= l1_old + gap_tol * max(1.0, l1_old) and feasible(refit):
        return refit
    return x


def _finish(
    x: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    nu: np.ndarray,
    radius: float,
    radius_dual_norm,
    feasibility_residual: Callable[[np.ndarray], float],
    feasibility_limit: float,
    outcome_iterations: int,
    residuals_ok: bool,
    gap_tol: float,
) -> RecoverySolution:
    gap, _, g_feas, nu_feas = _certificate_gap(a, b, nu, x, radius, radius_dual_norm)
    residual = feasibility_residual(x)
    feasible_now = residual <= feasibility_limit
    mask = _detect_support(x)
    off = ~mask
    # two signatures of a non-unique minimizer: a dual coordinate at the
    # subgradient boundary off the support, or a support whose columns
    # are linearly dependent (the minimizer sits on an optimal face)
    nonunique = bool(np.any(np.abs(g_feas[off]) >= 1.0 - NONUNIQUE_MARGIN)) if off.any() else False
    if mask.any() and int(np.linalg.matrix_rank(a[:, mask])) < int(mask.sum()):
        nonunique = True
    converged = bool(residuals_ok and feasible_now and gap <= gap_tol)
    return RecoverySolution(
        beta_hat=x,
        objective=float(np.sum(np.abs(x))),
        residual=float(residual),
        kkt_gap=float(gap),
        iterations=outcome_iterations,
        converged=converged,
        nonunique_flag=nonunique,
        dual_certificate=nu_feas,
    )


def _zero_solution(p: int, residual: float, dual_dim: int) -> RecoverySolution:
    # nu = 0 is dual feasible for every program and certifies the zero
    # minimizer exactly (dual objective 0 = l1 objective)
    return RecoverySolution(
        beta_hat=np.zeros(p),
        objective=0.0,
        residual=float(residual),
        kkt_gap=0.0,
        iterations=0,
        converged=True,
        nonunique_flag=False,
        dual_certificate=np.zeros(dual_dim),
    )


def basis_pursuit(
    phi,
    y,
    tol: float = DEFAULT_GAP_TOL,
    *,
    eq_tol: float = DEFAULT_EQ_TOL,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RecoverySolution:
    """min ||x||_1 subject to Phi x = y (numerically, within eq_tol).

    Raises InfeasibleError when y is not in the column span of Phi;
    hitting the iteration cap returns the best iterate with
    converged=False instead of raising.
    """
    mat = as_sensing_matrix(phi)
    a, yy = mat.array, np.asarray(y, dtype=np.float64)
    if yy.shape != (mat.n,):
        raise PreconditionError(f"y must have shape ({mat.n},), got {yy.shape}")
    y_scale = max(1.0, float(np.linalg.norm(yy)))
    ls, *_ = np.linalg.lstsq(a, yy, rcond=None)
    span_residual = float(np.linalg.norm(a @ ls - yy))
    if span_residual > max(eq_tol * y_scale, 1e-8 * y_scale):
        raise InfeasibleError(
            f"y is outside the column span (distance {span_residual:g})"
        )
    if float(np.linalg.norm(yy)) <= eq_tol:
        return _zero_solution(mat.p, 0.0, mat.n)
    # drive iteration residuals well below the equality tolerance so the
    # final iterate is feasible under it even without a polish
    outcome = _admm_l1(a, yy, lambda w: np.zeros_like(w), min(residual_tol, eq_tol / 10.0), max_iter)
    feas_limit = eq_tol * y_scale

    def resid(x):
        return float(np.linalg.norm(a @ x - yy))

    x = _polish(outcome.x, a, yy, lambda g: resid(g) <= feas_limit, tol)
    return _finish(
        x, a, yy, outcome.nu, 0.0, lambda nu: 0.0, resid, feas_limit,
        outcome.iterations, outcome.residuals_ok, tol,
    )


def bpdn(
    phi,
    y,
    epsilon: float,
    tol: float = DEFAULT_GAP_TOL,
    *,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RecoverySolution:
    """min ||x||_1 subject to ||Phi x - y||_2 <= epsilon."""
    mat = as_sensing_matrix(phi)
    eps = float(epsilon)
    if eps < 0.0:
        raise PreconditionError(f"epsilon must be >= 0, got {epsilon}")
    a, yy = mat.array, np.asarray(y, dtype=np.float64)
    if yy.shape != (mat.n,):
        raise PreconditionError(f"y must have shape ({mat.n},), got {yy.shape}")
    norm_y = float(np.linalg.norm(yy))
    if norm_y <= eps:
        return _zero_solution(mat.p, norm_y, mat.n)
    if eps == 0.0:
        return basis_pursuit(
            phi, y, tol, residual_tol=residual_tol, max_iter=max_iter
        )

    def project(w):
        nw = float(np.linalg.norm(w))
        if nw <= eps:
            return w
        return w * (eps / nw)

    outcome = _admm_l1(a, yy, project, residual_tol, max_iter)
    feas_limit = eps + tol * max(1.0, eps)

    def resid(x):
        return float(np.linalg.norm(a @ x - yy))

    x = _polish(outcome.x, a, yy, lambda g: resid(g) <= feas_limit, tol)
    return _finish(
        x, a, yy, outcome.nu, eps, lambda nu: float(np.linalg.norm(nu)),
        resid, feas_limit, outcome.iterations, outcome.residuals_ok, tol,
    )


def dantzig_selector(
    phi,
    y,
    lam: float,
    tol: float = DEFAULT_GAP_TOL,
    *,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RecoverySolution:
    """min ||x||_1 subject to ||Phi'(y - Phi x)||_inf <= lambda.

    Internally solved over the normal-equations operator A = Phi' Phi,
    b = Phi' y, whose residual b - A x is exactly the constrained
    correlation vector, making the box constraint a clip projection.
    """
    mat = as_sensing_matrix(phi)
    lmb = float(lam)
    if lmb < 0.0:
        raise PreconditionError(f"lambda must be >= 0, got {lam}")
    yy = np.asarray(y, dtype=np.float64)
    if yy.shape != (mat.n,):
        raise PreconditionError(f"y must have shape ({mat.n},), got {yy.shape}")
    gram = mat.gram()
    corr = mat.array.T @ yy
    if float(np.max(np.abs(corr))) <= lmb:
        return _zero_solution(mat.p, float(np.max(np.abs(corr))), mat.p)

    def project(w):
        return np.clip(w, -lmb, lmb)

    outcome = _admm_l1(gram, corr, project, residual_tol, max_iter)
    feas_limit = lmb + tol * max(1.0, lmb)

    def resid(x):
        return float(np.max(np.abs(corr - gram @ x)))

    x = _polish(outcome.x, mat.array, yy, lambda g: resid(g) <= feas_limit, tol)
    return _finish(
        x, gram, corr, outcome.nu, lmb, lambda nu: float(np.sum(np.abs(nu))),
        resid, feas_limit, outcome.iterations, outcome.residuals_ok, tol,
    )


def solve_problem(problem: RecoveryProblem, tol: float = DEFAULT_GAP_TOL, **kwargs) -> RecoverySolution:
    c = problem.constraint
    if isinstance(c, EqualityConstraint):
        return basis_pursuit(problem.phi, problem.y, tol, **kwargs)
    if isinstance(c, L2BallConstraint):
        return bpdn(problem.phi, problem.y, c.epsilon, tol, **kwargs)
    if isinstance(c, DantzigBoxConstraint):
        return dantzig_selector(problem.phi, problem.y, c.lam, tol, **kwargs)
    raise PreconditionError(f"unknown constraint {c!r}")


def _supports_up_to(p: int, k_max: int):
    for k in range(0, k_max + 1):
        yield from itertools.combinations(range(p), k)


def l0_oracle(
    phi,
    y,
    k_max: int,
    tol: float = 1e-9,
    budget: int | None = None,
) -> np.ndarray | None:
    """Sparsest vector gamma with ||Phi gamma - y||_2 <= tol, by
    exhaustive least squares over all supports of size <= k_max.

    Returns None when no support up to k_max fits. Ties in sparsity are
    broken by smaller residual, then by lexicographic support order
    (which is the enumeration order, so the first strict improvement
    wins). The enumeration cost is checked against `budget` up front.
    """
    mat = as_sensing_matrix(phi)
    yy = np.asarray(y, dtype=np.float64)
    if yy.shape != (mat.n,):
        raise PreconditionError(f"y must have shape ({mat.n},), got {yy.shape}")
    kk = int(k_max)
    if kk < 0 or kk > mat.p:
        raise PreconditionError(f"k_max={k_max} out of range for p={mat.p}")
    from .rip import DEFAULT_BUDGET

    required = sum(math.comb(mat.p, k) for k in range(kk + 1))
    cap = DEFAULT_BUDGET if budget is None else int(budget)
    if required > cap:
        raise BudgetExceededError(required, cap, "l0 oracle enumeration")
    a = mat.array
    for k in range(0, kk + 1):
        best: tuple[float, tuple[int, ...], np.ndarray] | None = None
        for support in itertools.combinations(range(mat.p), k):
            if k == 0:
                residual = float(np.linalg.norm(yy))
                fit = np.zeros(0)
            else:
                cols = a[:, support]
                fit, *_ = np.linalg.lstsq(cols, yy, rcond=None)
                residual = float(np.linalg.norm(cols @ fit - yy))
            if residual <= tol and (best is None or residual < best[0]):
                best = (residual, support, fit)
        if best is not None:
            out = np.zeros(mat.p)
            out[list(best[1])] = best[2]
            return out
    return None


def l0_solutions(
    phi,
    y,
    k: int,
    tol: float = 1e-9,
    budget: int | None = None,
    distinct_tol: float = 1e-6,
) -> list[np.ndarray]:
    """All distinct vectors with at most k nonzeros fitting y within tol.

    Enumerates supports of size exactly k (smaller solutions appear as
    fits with zero padding) and deduplicates by l2 distance.
    """
    mat = as_sensing_matrix(phi)
    yy = np.asarray(y, dtype=np.float64)
    kk = int(k)
    if kk < 1 or kk > mat.p:
        raise PreconditionError(f"k={k} out of range for p={mat.p}")
    from .rip import DEFAULT_BUDGET

    required = math.comb(mat.p, kk)
    cap = DEFAULT_BUDGET if budget is None else int(budget)
    if required > cap:
        raise BudgetExceededError(required, cap, "l0 solution enumeration")
    a = mat.array
    found: list[np.ndarray] = []
    for support in itertools.combinations(range(mat.p), kk):
        cols = a[:, support]
        fit, *_ = np.linalg.lstsq(cols, yy, rcond=None)
        if float(np.linalg.norm(cols @ fit - yy)) > tol:
            continue
        candidate = np.zeros(mat.p)
        candidate[list(support)] = fit
        if all(float(np.linalg.norm(candidate - g)) > distinct_tol for g in found):
            found.append(candidate)
    return found
