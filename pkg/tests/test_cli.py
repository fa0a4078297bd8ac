import json
import math
import subprocess
import sys

import numpy as np
import pytest

from zofl import cli
from zofl.planner import ProblemConstants, plan


def _write(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg), encoding="utf-8")
    return str(p)


PLAN_CFG = {
    "algorithm": "mb-asgd",
    "scheme": "l2",
    "feedback": "two-point",
    "constants": {"d": 100, "M": 1.0, "M2": 1.0, "R": 1.0, "eps": 0.1},
}

RUN_CFG = {
    "problem": {"kind": "simplex-linf", "d": 6, "seed": 3},
    "algorithm": "mb-asgd",
    "scheme": "l2",
    "feedback": "two-point",
    "topology": {"B": 2, "K": 2, "N": 3},
    "constants": {"eps": 0.05},
}

SWEEP_CFG = {
    "problem": {"kind": "simplex-linf", "d": 8, "seed": 1},
    "algorithm": "sm-asgd",
    "feedback": "two-point",
    "budget": 8,
    "sweep": {"K": [1, 2, 3, 8]},
    "constants": {"eps": 0.2},
    "repeat": 2,
}


def test_params_prints_the_planner_output(tmp_path, capsys):
    cfg = _write(tmp_path, "p.json", PLAN_CFG)
    out = tmp_path / "o"
    assert cli.main(["params", "--config", cfg, "--out", str(out)]) == 0
    got = json.loads(capsys.readouterr().out)
    consts = ProblemConstants(d=100, M=1.0, M2=1.0, R=1.0, eps=0.1)
    want = plan("mb-asgd", consts, "l2", "two-point").to_dict()
    assert got == want
    assert got["N"] == 220 and got["K"] == 1 and got["B"] == 14810673
    assert got["T"] == 3258348060
    assert got["gamma"] == pytest.approx(0.05, rel=1e-15)
    assert got["grad_lip"] == pytest.approx(200.0, rel=1e-12)
    assert got["sigma_sq"] == pytest.approx(565.685424949238, rel=1e-12)
    assert got["max_noise"] == pytest.approx(8.333333333333334e-05, rel=1e-12)
    on_disk = json.loads((out / "plan.json").read_text(encoding="utf-8"))
    assert on_disk == got


def test_params_missing_key_is_a_config_error(tmp_path):
    cfg = dict(PLAN_CFG)
    del cfg["scheme"]
    assert cli.main(["params", "--config", _write(tmp_path, "p.json", cfg)]) == 2


def test_unknown_keys_are_rejected(tmp_path):
    bad_top = dict(PLAN_CFG, typo=True)
    assert cli.main(["params", "--config", _write(tmp_path, "a.json", bad_top)]) == 2
    bad_nested = dict(RUN_CFG)
    bad_nested["problem"] = dict(RUN_CFG["problem"], shape="round")
    assert cli.main(["run", "--config", _write(tmp_path, "b.json", bad_nested)]) == 2


def test_one_point_needs_value_bound(tmp_path):
    cfg = dict(PLAN_CFG, feedback="one-point")
    assert cli.main(["params", "--config", _write(tmp_path, "p.json", cfg)]) == 2
    with_g = dict(cfg, constants=dict(cfg["constants"], G=1.0))
    assert cli.main(["params", "--config", _write(tmp_path, "q.json", with_g)]) == 0


def test_run_outputs_are_byte_identical_across_invocations(tmp_path, capsys):
    cfg = _write(tmp_path, "r.json", RUN_CFG)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", "--config", cfg, "--out", str(out_a)]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(out_b)]) == 0
    capsys.readouterr()
    csv_a = (out_a / "run_seed0.csv").read_bytes()
    assert csv_a == (out_b / "run_seed0.csv").read_bytes()
    assert (out_a / "summary.json").read_bytes() == (out_b / "summary.json").read_bytes()
    lines = csv_a.decode().strip().split("\n")
    assert lines[0] == "round,calls,value,gap,elapsed_ms,seed,config_hash"
    assert len(lines) == 1 + 3
    summary = json.loads((out_a / "summary.json").read_text())
    assert summary["runs"][0]["calls"] == 2 * 2 * 3 * 2  # B*K*N two-point queries
    assert set(summary) == {
        "algorithm", "command", "config_hash", "feedback",
        "mean_final_gap", "runs", "scheme", "std_final_gap",
    }


def test_run_seed_and_repeat_flags(tmp_path, capsys):
    cfg = _write(tmp_path, "r.json", RUN_CFG)
    out = tmp_path / "o"
    assert cli.main(["run", "--config", cfg, "--out", str(out), "--seed", "5", "--repeat", "2"]) == 0
    capsys.readouterr()
    assert (out / "run_seed5.csv").exists()
    assert (out / "run_seed6.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert [r["seed"] for r in summary["runs"]] == [5, 6]
    assert summary["std_final_gap"] >= 0.0


def test_run_rejects_planner_only_algorithms(tmp_path):
    for alg in ("local-acsa", "fedac"):
        cfg = dict(RUN_CFG, algorithm=alg)
        assert cli.main(["run", "--config", _write(tmp_path, f"{alg}.json", cfg)]) == 2


def test_run_rejects_budget_and_topology_together(tmp_path):
    cfg = dict(RUN_CFG, budget=100)
    assert cli.main(["run", "--config", _write(tmp_path, "c.json", cfg)]) == 2


def test_run_matches_problem_family_to_algorithm(tmp_path):
    saddle_alg = dict(RUN_CFG, algorithm="mb-smp")
    assert cli.main(["run", "--config", _write(tmp_path, "a.json", saddle_alg)]) == 2
    game_cfg = {
        "problem": {"kind": "bilinear-game", "matrix": [[0.0, 1.0], [1.0, 0.0]]},
        "algorithm": "mb-asgd",
        "scheme": "l2",
        "feedback": "two-point",
        "topology": {"B": 1, "K": 2, "N": 2},
        "constants": {"eps": 0.1},
    }
    assert cli.main(["run", "--config", _write(tmp_path, "b.json", game_cfg)]) == 2


def test_smp_run_via_cli(tmp_path, capsys):
    game_cfg = {
        "problem": {"kind": "bilinear-game", "matrix": [[0.0, 1.0], [1.0, 0.0]]},
        "algorithm": "sm-smp",
        "scheme": "l2",
        "feedback": "two-point",
        "topology": {"B": 1, "K": 5, "N": 4},
        "constants": {"eps": 0.1},
        "step": {"sigma": 2.0},
    }
    out = tmp_path / "o"
    cfg = _write(tmp_path, "g.json", game_cfg)
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["runs"][0]["calls"] == 5 * 4 * 2 * 2
    assert math.isfinite(summary["mean_final_gap"])


def test_infeasible_start_is_exit_three(tmp_path):
    cfg = dict(RUN_CFG, x0=[2.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    assert cli.main(["run", "--config", _write(tmp_path, "x.json", cfg)]) == 3


def test_sweep_k_outputs_and_divisibility_warning(tmp_path, capsys):
    cfg = _write(tmp_path, "s.json", SWEEP_CFG)
    out = tmp_path / "o"
    assert cli.main(["sweep-k", "--config", cfg, "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "K=3 does not divide budget 8" in captured.err
    assert "spearman" in captured.out
    csv_lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert csv_lines[0] == "scheme,K,N,B,repeat,mean_final_gap,se_final_gap"
    assert len(csv_lines) == 1 + 2 * 3  # both schemes, K in {1, 2, 8}
    summary = json.loads((out / "sweep_summary.json").read_text())
    assert summary["K"] == [1, 2, 8]
    assert set(summary["spearman"]) == {"l1", "l2"}
    for row in summary["rows"]:
        assert row["K"] * row["N"] == 8
    out_b = tmp_path / "p"
    assert cli.main(["sweep-k", "--config", cfg, "--out", str(out_b)]) == 0
    capsys.readouterr()
    assert (out / "sweep.csv").read_bytes() == (out_b / "sweep.csv").read_bytes()


def test_sweep_k_threads_match_serial(tmp_path, capsys):
    cfg = _write(tmp_path, "s.json", SWEEP_CFG)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep-k", "--config", cfg, "--out", str(out_a), "--threads", "1"]) == 0
    assert cli.main(["sweep-k", "--config", cfg, "--out", str(out_b), "--threads", "4"]) == 0
    capsys.readouterr()
    assert (out_a / "sweep.csv").read_bytes() == (out_b / "sweep.csv").read_bytes()


def test_sweep_k_rejects_bad_shapes(tmp_path):
    with_topo = dict(SWEEP_CFG, topology={"B": 1, "K": 1, "N": 1})
    assert cli.main(["sweep-k", "--config", _write(tmp_path, "a.json", with_topo)]) == 2
    smp = dict(SWEEP_CFG, algorithm="mb-smp")
    smp["problem"] = {"kind": "bilinear-game", "matrix": [[0.0, 1.0], [1.0, 0.0]]}
    assert cli.main(["sweep-k", "--config", _write(tmp_path, "b.json", smp)]) == 2
    none_fit = dict(SWEEP_CFG, sweep={"K": [3, 5]})
    assert cli.main(["sweep-k", "--config", _write(tmp_path, "c.json", none_fit)]) == 2


def test_spearman_hand_values():
    assert cli.spearman([1, 2, 3], [1, 4, 9]) == pytest.approx(1.0)
    assert cli.spearman([1, 2, 3], [9, 4, 1]) == pytest.approx(-1.0)
    assert cli.spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    # ties get average ranks
    assert cli.spearman([1, 2, 2, 3], [1, 2, 2, 3]) == pytest.approx(1.0)


def test_rank_average_ties():
    assert np.allclose(cli._rank([10, 20, 20, 30]), [1.0, 2.5, 2.5, 4.0])


def test_config_hash_is_stable_and_order_free():
    a = {"x": 1, "y": {"z": 2}}
    b = {"y": {"z": 2}, "x": 1}
    assert cli.config_hash(a) == cli.config_hash(b)
    assert len(cli.config_hash(a)) == 12
    assert cli.config_hash(a) != cli.config_hash({"x": 1, "y": {"z": 3}})


def test_validate_quick_self_checks_pass(capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") == 15


def test_console_script_is_installed(tmp_path):
    cfg = _write(tmp_path, "p.json", PLAN_CFG)
    proc = subprocess.run(
        ["zofl", "params", "--config", cfg], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["N"] == 220


def test_missing_config_flag_is_exit_two():
    assert cli.main(["run"]) == 2


def test_bad_json_and_missing_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert cli.main(["params", "--config", str(path)]) == 2
    assert cli.main(["params", "--config", str(tmp_path / "absent.json")]) == 2
