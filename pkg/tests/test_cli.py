"""Command-line surface: subcommands, exit codes, machine output."""

import json
import os

import numpy as np
import pytest

from oracles import simplex_frame

from ripkit.cli import EXIT_BUDGET, EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from ripkit.matrices import matrix_to_csv_text, read_matrix_csv, write_matrix_csv
from ripkit.counterexample import sensing_matrix_from_gram


@pytest.fixture()
def adversarial_csv(tmp_path):
    path = tmp_path / "adv.csv"
    write_matrix_csv(path, sensing_matrix_from_gram(2).array)
    return str(path)


def write_problem(tmp_path, phi, y, constraint, beta_true=None, name="prob.json"):
    doc = {"matrix": matrix_to_csv_text(phi), "y": list(map(float, y)), "constraint": constraint}
    if beta_true is not None:
        doc["beta_true"] = list(map(float, beta_true))
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestRip:
    def test_delta_and_theta_lines(self, adversarial_csv, capsys):
        assert main(["rip", adversarial_csv, "--k", "2", "--theta", "1", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "delta[2] = 0.333333333" in out
        assert "theta[1,1] = 0.333333333" in out
        assert "witness=" in out and "witnessA=" in out

    def test_audit_csv_and_profile_json(self, adversarial_csv, tmp_path, capsys):
        prof_path = tmp_path / "prof.json"
        code = main(["rip", adversarial_csv, "--audit", "3", "--json", str(prof_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("inequality_id,lhs,rhs,slack,holds")
        assert "False" not in out  # every inequality holds
        doc = json.loads(prof_path.read_text())
        assert (doc["n"], doc["p"]) == (3, 4)
        assert doc["delta"] and doc["theta"]

    def test_requires_some_request(self, adversarial_csv):
        assert main(["rip", adversarial_csv]) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        assert main(["rip", str(tmp_path / "absent.csv"), "--k", "1"]) == EXIT_USAGE

    def test_budget_env_var(self, adversarial_csv, monkeypatch, capsys):
        monkeypatch.setenv("RIPKIT_BUDGET", "2")
        assert main(["rip", adversarial_csv, "--k", "2"]) == EXIT_BUDGET
        err = capsys.readouterr().err
        assert "required=6" in err  # C(4,2) evaluations were needed

    def test_bad_budget_env_var(self, adversarial_csv, monkeypatch):
        monkeypatch.setenv("RIPKIT_BUDGET", "lots")
        assert main(["rip", adversarial_csv, "--k", "1"]) == EXIT_USAGE


class TestRecover:
    def test_solves_and_prints_solution(self, tmp_path, capsys):
        phi = simplex_frame(8)
        beta = np.zeros(8)
        beta[[1, 5]] = [1.0, -2.0]
        path = write_problem(tmp_path, phi, phi @ beta, {"type": "equality"})
        assert main(["recover", path]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["converged"]
        assert np.allclose(doc["beta_hat"], beta, atol=1e-6)

    def test_solver_flag_must_match_constraint(self, tmp_path, capsys):
        phi = simplex_frame(6)
        path = write_problem(tmp_path, phi, phi[:, 0], {"type": "equality"})
        assert main(["recover", path, "--solver", "bp"]) == EXIT_OK
        capsys.readouterr()
        assert main(["recover", path, "--solver", "ds"]) == EXIT_USAGE

    def test_check_conditions_reports(self, tmp_path, capsys):
        phi = simplex_frame(12)  # order-2 constant 1/11, comfortably certified
        beta = np.zeros(12)
        beta[[0, 7]] = [1.5, -1.0]
        path = write_problem(tmp_path, phi, phi @ beta, {"type": "equality"}, beta_true=beta)
        assert main(["recover", path, "--check-conditions"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "delta_below_threshold" in out
        assert "delta_plus_t_theta_below_one" in out

    def test_check_conditions_flags_breach(self, tmp_path, capsys):
        # a certified instance with a deliberately wrong beta_true: the
        # reported error must breach the certified bound and exit 1
        phi = simplex_frame(12)
        beta = np.zeros(12)
        beta[[0, 7]] = [1.5, -1.0]
        lie = np.zeros(12)
        lie[[2, 3]] = [5.0, 5.0]
        path = write_problem(tmp_path, phi, phi @ beta, {"type": "equality"}, beta_true=lie)
        assert main(["recover", path, "--check-conditions"]) == EXIT_FAILURE
        assert "bound" in capsys.readouterr().err.lower()

    def test_infeasible_problem_fails(self, tmp_path, capsys):
        phi = np.zeros((3, 2))
        phi[0, 0] = phi[1, 1] = 1.0
        path = write_problem(tmp_path, phi, np.array([0.0, 0.0, 1.0]), {"type": "equality"})
        assert main(["recover", path]) == EXIT_FAILURE

    def test_incomplete_problem_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "prob.json"
        path.write_text(json.dumps({"y": [1.0]}))
        assert main(["recover", str(path)]) == EXIT_USAGE
        assert "missing problem fields" in capsys.readouterr().err

    def test_unparseable_problem_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "prob.json"
        path.write_text("{ nope")
        assert main(["recover", str(path)]) == EXIT_USAGE
        assert "invalid JSON" in capsys.readouterr().err


class TestCounterexample:
    def test_prints_inline_json(self, capsys):
        assert main(["counterexample", "--k", "2"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["k"] == 2
        assert doc["delta_claimed"] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert doc["verification"]["all_ok"]
        assert doc["matrix_csv"].startswith("3,4\n")

    def test_writes_files(self, tmp_path, capsys):
        out_dir = str(tmp_path / "family")
        assert main(["counterexample", "--k", "3", "--out", out_dir]) == EXIT_OK
        phi = read_matrix_csv(os.path.join(out_dir, "phi_k3.csv"))
        assert phi.shape == (5, 6)
        doc = json.loads(open(os.path.join(out_dir, "instance_k3.json")).read())
        assert doc["matrix_csv"] == "phi_k3.csv"
        assert len(doc["beta1"]) == 6

    def test_rejects_bad_k(self):
        assert main(["counterexample", "--k", "0"]) == EXIT_USAGE


class TestExperiment:
    def test_runs_and_reruns_byte_identical(self, tmp_path, capsys):
        cfg = {
            "ensemble": "gaussian",
            "n": 5,
            "p": 8,
            "k": 2,
            "constraint": {"type": "equality"},
            "trials": 3,
            "master_seed": 2024,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["experiment", str(cfg_path), "--out", str(tmp_path / "r1")]) == EXIT_OK
        assert main(["experiment", str(cfg_path), "--out", str(tmp_path / "r2")]) == EXIT_OK
        first = (tmp_path / "r1" / "records.jsonl").read_bytes()
        second = (tmp_path / "r2" / "records.jsonl").read_bytes()
        assert first == second
        assert (tmp_path / "r1" / "summary.csv").exists()
        out = capsys.readouterr().out
        assert "trials=3" in out

    def test_env_budget_is_recorded_per_trial(self, tmp_path, monkeypatch):
        cfg = {
            "ensemble": "gaussian",
            "n": 5,
            "p": 10,
            "k": 3,
            "constraint": {"type": "equality"},
            "trials": 2,
            "master_seed": 5,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        monkeypatch.setenv("RIPKIT_BUDGET", "4")
        assert main(["experiment", str(cfg_path), "--out", str(tmp_path / "r")]) == EXIT_OK
        lines = (tmp_path / "r" / "records.jsonl").read_text().strip().split("\n")
        for line in lines:
            rec = json.loads(line)
            assert rec["delta_k"] is None
            assert "budget" in rec["budget_error"]

    def test_bad_config_is_usage_error(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"ensemble": "gaussian"}))
        assert main(["experiment", str(cfg_path)]) == EXIT_USAGE

    def test_unparseable_config_is_usage_error(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text("not json {")
        assert main(["experiment", str(cfg_path)]) == EXIT_USAGE
        assert "invalid JSON" in capsys.readouterr().err


class TestVerifyNorms:
    def test_reports_clean_run(self, capsys):
        assert main(["verify-norms", "--trials", "200", "--seed", "3"]) == EXIT_OK
        out = capsys.readouterr().out.strip()
        assert out == "trials=200 violations=0 extremal_constructions=8 equality_misses=0"

    def test_dims_flag(self, capsys):
        assert main(["verify-norms", "--trials", "50", "--dims", "2-5", "--seed", "1"]) == EXIT_OK
        assert "violations=0" in capsys.readouterr().out


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == EXIT_USAGE
    capsys.readouterr()


def test_entry_point_is_registered():
    import importlib.metadata as md

    eps = md.entry_points(group="console_scripts")
    ours = [e for e in eps if e.name == "ripkit"]
    assert ours and ours[0].value == "ripkit.cli:entry"
