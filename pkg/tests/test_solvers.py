"""The three l1 programs, their certificates, and the exhaustive l0 oracle."""

import json
import math

import numpy as np
import pytest

from oracles import l1_min_vertex

from ripkit.counterexample import build_instance
from ripkit.errors import BudgetExceededError, InfeasibleError, PreconditionError
from ripkit.solvers import (
    DantzigBoxConstraint,
    EqualityConstraint,
    L2BallConstraint,
    RecoveryProblem,
    basis_pursuit,
    bpdn,
    constraint_from_dict,
    constraint_to_dict,
    dantzig_selector,
    l0_oracle,
    l0_solutions,
    solve_problem,
)


def unit_columns(seed: int, n: int, p: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=(n, p))
    return phi / np.linalg.norm(phi, axis=0)


def sparse_instance(seed: int, n: int, p: int, k: int):
    rng = np.random.default_rng(seed + 1000)
    phi = unit_columns(seed, n, p)
    beta = np.zeros(p)
    support = rng.choice(p, size=k, replace=False)
    beta[support] = rng.choice([-1.0, 1.0], size=k) * rng.uniform(0.5, 2.0, size=k)
    return phi, beta, phi @ beta


def recompute_gap(solution, a, b, radius, dual_norm):
    """Re-derive the stored KKT gap from the carried dual certificate."""
    nu = solution.dual_certificate
    assert nu is not None
    assert float(np.max(np.abs(a.T @ nu))) <= 1.0 + 1e-10 if nu.size else True
    dual_obj = -float(b @ nu) - radius * dual_norm(nu)
    return solution.objective - dual_obj


class TestBasisPursuit:
    def test_identity_returns_y(self):
        y = np.array([0.5, 0.0, -2.0, 1.0])
        sol = basis_pursuit(np.eye(4), y)
        assert sol.converged
        assert np.allclose(sol.beta_hat, y, atol=1e-8)
        assert sol.objective == pytest.approx(float(np.sum(np.abs(y))), abs=1e-8)

    def test_zero_y(self):
        sol = basis_pursuit(unit_columns(0, 4, 7), np.zeros(4))
        assert sol.converged and not sol.beta_hat.any()
        assert sol.iterations == 0

    def test_infeasible_raises(self):
        phi = np.zeros((3, 2))
        phi[0, 0] = phi[1, 1] = 1.0  # span misses the third coordinate
        with pytest.raises(InfeasibleError):
            basis_pursuit(phi, np.array([0.0, 0.0, 1.0]))

    def test_recovers_sparse_signal(self):
        phi, beta, y = sparse_instance(3, 8, 16, 2)
        sol = basis_pursuit(phi, y)
        assert sol.converged
        assert np.linalg.norm(sol.beta_hat - beta) <= 1e-6

    def test_matches_vertex_oracle(self):
        for seed in range(12):
            n = 4 + seed % 3
            phi, _, y = sparse_instance(seed, n, 8, 2)
            best_l1, _ = l1_min_vertex(phi, y)
            sol = basis_pursuit(phi, y)
            assert sol.converged
            assert abs(sol.objective - best_l1) <= 1e-6 * max(1.0, best_l1)

    def test_certificate_recomputes(self):
        phi, _, y = sparse_instance(7, 6, 12, 3)
        sol = basis_pursuit(phi, y)
        gap = recompute_gap(sol, phi, y, 0.0, lambda nu: 0.0)
        assert gap == pytest.approx(sol.kkt_gap, abs=1e-10)
        assert np.linalg.norm(phi @ sol.beta_hat - y) == pytest.approx(sol.residual, abs=1e-12)

    def test_objective_recomputes(self):
        phi, _, y = sparse_instance(9, 6, 12, 3)
        sol = basis_pursuit(phi, y)
        assert sol.objective == pytest.approx(float(np.sum(np.abs(sol.beta_hat))), abs=1e-12)

    def test_iteration_cap_returns_unconverged(self):
        phi, _, y = sparse_instance(5, 6, 12, 3)
        sol = basis_pursuit(phi, y, max_iter=3)
        assert not sol.converged
        assert sol.iterations == 3

    def test_tall_matrix(self):
        phi = unit_columns(11, 6, 3)
        beta = np.array([0.0, 3.0, 0.0])
        sol = basis_pursuit(phi, phi @ beta)
        assert sol.converged
        assert np.allclose(sol.beta_hat, beta, atol=1e-7)


class TestBpdn:
    def test_zero_shortcuts(self):
        phi = unit_columns(0, 4, 6)
        assert not bpdn(phi, np.zeros(4), 0.0).beta_hat.any()
        y = phi[:, 0] * 0.5
        sol = bpdn(phi, y, epsilon=1.0)  # zero is feasible
        assert sol.converged and not sol.beta_hat.any()
        assert sol.residual == pytest.approx(0.5, abs=1e-12)

    def test_epsilon_zero_is_equality_program(self):
        phi, beta, y = sparse_instance(2, 8, 14, 2)
        sol = bpdn(phi, y, 0.0)
        assert sol.converged
        assert np.linalg.norm(sol.beta_hat - beta) <= 1e-6

    def test_feasibility_and_certificate(self):
        phi, _, y = sparse_instance(4, 8, 16, 3)
        eps = 0.01
        sol = bpdn(phi, y, eps)
        assert sol.converged
        assert sol.residual <= eps + 1e-7
        gap = recompute_gap(sol, phi, y, eps, lambda nu: float(np.linalg.norm(nu)))
        assert gap == pytest.approx(sol.kkt_gap, abs=1e-10)

    def test_objective_monotone_in_epsilon(self):
        phi, _, y = sparse_instance(6, 8, 16, 3)
        grid = [1e-3, 1e-2, 5e-2, 0.2, 1.0]
        objectives = [bpdn(phi, y, eps).objective for eps in grid]
        for smaller, larger in zip(objectives, objectives[1:]):
            assert larger <= smaller + 1e-6

    def test_rejects_negative_epsilon(self):
        with pytest.raises(PreconditionError):
            bpdn(np.eye(3), np.ones(3), -0.1)


class TestDantzigSelector:
    def test_zero_shortcuts(self):
        phi = unit_columns(1, 5, 8)
        assert not dantzig_selector(phi, np.zeros(5), 0.5).beta_hat.any()
        y = 0.1 * phi[:, 2]
        lam = float(np.max(np.abs(phi.T @ y))) + 0.01
        sol = dantzig_selector(phi, y, lam)
        assert sol.converged and not sol.beta_hat.any()

    def test_box_feasibility_and_certificate(self):
        phi, _, y = sparse_instance(8, 8, 16, 3)
        lam = 0.05
        sol = dantzig_selector(phi, y, lam)
        assert sol.converged
        corr = phi.T @ (y - phi @ sol.beta_hat)
        assert float(np.max(np.abs(corr))) <= lam + 1e-7
        assert float(np.max(np.abs(corr))) == pytest.approx(sol.residual, abs=1e-12)
        gram, b = phi.T @ phi, phi.T @ y
        gap = recompute_gap(sol, gram, b, lam, lambda nu: float(np.sum(np.abs(nu))))
        assert gap == pytest.approx(sol.kkt_gap, abs=1e-10)

    def test_small_lambda_approaches_exact_recovery(self):
        phi, beta, y = sparse_instance(10, 8, 16, 2)
        sol = dantzig_selector(phi, y, 1e-6)
        assert sol.converged
        assert np.linalg.norm(sol.beta_hat - beta) <= 1e-4

    def test_rejects_negative_lambda(self):
        with pytest.raises(PreconditionError):
            dantzig_selector(np.eye(3), np.ones(3), -1.0)


class TestNonUniqueness:
    def test_adversarial_instance_is_flagged(self):
        inst = build_instance(2)
        sol = basis_pursuit(inst.phi, inst.phi.array @ inst.beta1)
        assert sol.converged
        assert sol.nonunique_flag

    def test_generic_instance_is_not_flagged(self):
        phi, _, y = sparse_instance(12, 8, 16, 2)
        sol = basis_pursuit(phi, y)
        assert sol.converged
        assert not sol.nonunique_flag


class TestL0Oracle:
    def test_identity(self):
        y = np.array([0.0, 2.0, 0.0, -1.0])
        out = l0_oracle(np.eye(4), y, k_max=4)
        assert np.allclose(out, y, atol=1e-12)

    def test_finds_sparsest_not_just_any(self):
        phi, beta, y = sparse_instance(13, 8, 14, 2)
        out = l0_oracle(phi, y, k_max=3)
        assert out is not None
        assert int(np.count_nonzero(out)) == 2
        assert np.allclose(out, beta, atol=1e-8)

    def test_tie_broken_lexicographically(self):
        phi = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        out = l0_oracle(phi, np.array([1.0, 1.0]), k_max=2)
        assert sorted(np.flatnonzero(out)) == [0, 2]  # (0,2) precedes (1,2)

    def test_not_found_returns_none(self):
        phi = np.eye(3)[:, :2]  # span misses e3
        assert l0_oracle(phi, np.array([0.0, 0.0, 1.0]), k_max=2) is None

    def test_budget(self):
        phi = unit_columns(2, 5, 12)
        with pytest.raises(BudgetExceededError) as info:
            l0_oracle(phi, phi[:, 0], k_max=4, budget=50)
        assert info.value.required == sum(math.comb(12, j) for j in range(5))

    def test_adversarial_family_has_two_preimages(self):
        inst = build_instance(2)
        sols = l0_solutions(inst.phi, inst.phi.array @ inst.beta1, k=2)
        assert len(sols) >= 2
        dists1 = min(np.linalg.norm(s - inst.beta1) for s in sols)
        dists2 = min(np.linalg.norm(s - inst.beta2) for s in sols)
        assert dists1 <= 1e-8 and dists2 <= 1e-8


class TestProblemJson:
    def test_constraint_dicts_round_trip(self):
        for c in (EqualityConstraint(), L2BallConstraint(0.25), DantzigBoxConstraint(0.1)):
            assert constraint_from_dict(constraint_to_dict(c)) == c

    def test_constraint_aliases(self):
        assert isinstance(constraint_from_dict({"type": "bp"}), EqualityConstraint)
        assert constraint_from_dict({"type": "bpdn", "epsilon": 0.5}).epsilon == 0.5
        assert constraint_from_dict({"type": "ds", "lam": 0.2}).lam == 0.2
        with pytest.raises(PreconditionError):
            constraint_from_dict({"type": "dantzig_box"})  # lambda missing
        with pytest.raises(PreconditionError):
            constraint_from_dict({"type": "huh"})

    def test_problem_round_trip_inline_matrix(self):
        phi, _, y = sparse_instance(1, 4, 6, 2)
        problem = RecoveryProblem(phi=phi, y=y, constraint=L2BallConstraint(0.1))
        back = RecoveryProblem.from_json(problem.to_json())
        assert np.array_equal(back.phi, problem.phi)
        assert np.array_equal(back.y, problem.y)
        assert back.constraint == problem.constraint

    def test_problem_matrix_as_path(self, tmp_path):
        from ripkit.matrices import write_matrix_csv

        phi, _, y = sparse_instance(2, 4, 6, 2)
        write_matrix_csv(tmp_path / "phi.csv", phi)
        doc = {"matrix": "phi.csv", "y": y.tolist(), "constraint": {"type": "equality"}}
        problem = RecoveryProblem.from_json(json.dumps(doc), base_dir=str(tmp_path))
        assert np.array_equal(problem.phi, phi)

    def test_problem_matrix_as_nested_lists(self):
        doc = {"matrix": [[1.0, 0.0], [0.0, 1.0]], "y": [1.0, 2.0], "constraint": {"type": "eq"}}
        problem = RecoveryProblem.from_json(json.dumps(doc))
        sol = solve_problem(problem)
        assert np.allclose(sol.beta_hat, [1.0, 2.0], atol=1e-9)

    def test_solution_json_schema(self):
        sol = basis_pursuit(np.eye(3), np.array([1.0, 0.0, 0.0]))
        doc = json.loads(sol.to_json())
        assert set(doc) == {
            "beta_hat",
            "objective",
            "residual",
            "kkt_gap",
            "iterations",
            "converged",
            "nonunique_flag",
        }

    def test_dimension_mismatch(self):
        with pytest.raises(PreconditionError):
            RecoveryProblem(phi=np.eye(3), y=np.ones(2), constraint=EqualityConstraint())


def test_solve_problem_dispatch():
    phi, beta, y = sparse_instance(4, 8, 12, 2)
    for constraint in (
        EqualityConstraint(),
        L2BallConstraint(1e-3),
        DantzigBoxConstraint(1e-3),
    ):
        problem = RecoveryProblem(phi=phi, y=y, constraint=constraint)
        sol = solve_problem(problem)
        assert sol.converged
        assert np.linalg.norm(sol.beta_hat - beta) <= 0.1
