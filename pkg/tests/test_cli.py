import json
from pathlib import Path

import numpy as np
import pytest

from phasestop import cli

BUNDLED = [
    "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4c",
    "fig5", "fig6", "blackwell", "social_optimum", "ph_example",
]

SMALL_MODEL = {
    "transition": [[1, 0], [0.3, 0.7]],
    "initial": [0, 1],
    "observation": {"discrete": [[0.8, 0.2], [0.2, 0.8]]},
}

SMALL_COST = {
    "family": "quickest_classical",
    "alpha": 0.0, "beta": 5.0, "d": 1.0, "rho": 1.0,
    "false_alarm": [0, 1],
}


def write_config(tmp_path, name, cfg):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_bundled_configs_parse():
    for name in BUNDLED:
        cfg = cli.load_config(name)
        if "model" in cfg:
            cli.parse_model(cfg["model"])
        if "cost" in cfg:
            cli.parse_cost(cfg["cost"])
        if "models" in cfg:
            for entry in cfg["models"]:
                cli.parse_model(entry["model"])


def test_unknown_config_rejected(capsys):
    assert cli.main(["solve", "--config", "no_such_config"]) == 2
    assert "no such file" in capsys.readouterr().err


def test_config_validation_messages(tmp_path, capsys):
    bad = write_config(tmp_path, "bad", {"model": SMALL_MODEL, "cost": {"family": "nope"}})
    assert cli.main(["solve", "--config", bad, "--out", str(tmp_path)]) == 2
    assert "unknown family" in capsys.readouterr().err
    bad2 = write_config(tmp_path, "bad2", {"cost": SMALL_COST})
    assert cli.main(["solve", "--config", bad2, "--out", str(tmp_path)]) == 2
    assert "missing required field" in capsys.readouterr().err


def test_solve_roundtrip_and_reproducibility(tmp_path):
    cfg = {
        "model": SMALL_MODEL,
        "cost": SMALL_COST,
        "grid": {"m": 60},
        "tol": 1e-10,
        "seed": 1,
    }
    ref = write_config(tmp_path, "small", cfg)
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    assert cli.main(["solve", "--config", ref, "--out", str(out1)]) == 0
    assert cli.main(["solve", "--config", ref, "--out", str(out2)]) == 0
    a = (out1 / "small_solution.csv").read_bytes()
    b = (out2 / "small_solution.csv").read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0] == "c0,c1,value,policy,component"
    assert len(lines) == 62
    report = json.loads((out1 / "small_report.json").read_text())
    assert report["stop_components"] == 1


def test_orders_command_eq52_family(tmp_path, capsys):
    def cfg(p, f):
        return {
            "model": {
                "transition": [[1, 0, 0], [0.3, 0.6, 0.1], [0.1, p, round(0.9 - p, 10)]],
                "initial": [0, 0, 1],
                "observation": {"gaussian": {"means": [0, 1, 1], "variances": [4, 4, 4]}},
            },
            "cost": {
                "family": "quickest_classical",
                "alpha": 0.5, "beta": 1.0, "d": 1.0, "rho": 0.75,
                "false_alarm": f,
            },
        }

    good = write_config(tmp_path, "good", cfg(0.2, [0, 1, 2]))
    assert cli.main(["orders", "--config", good, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out

    bad = write_config(tmp_path, "badp", cfg(0.1, [0, 1, 2]))
    assert cli.main(["orders", "--config", bad, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert any("A3" in line and "FAIL" in line for line in out.splitlines())


def test_spsa_rejects_invalid_gains(tmp_path, capsys):
    cfg = {
        "model": SMALL_MODEL,
        "cost": SMALL_COST,
        "iterations": 5,
        "gains": {"perturb_decay": 0.3},
        "seed": 0,
    }
    ref = write_config(tmp_path, "badgain", cfg)
    assert cli.main(["spsa", "--config", ref, "--out", str(tmp_path)]) == 2
    assert "decay" in capsys.readouterr().err


def test_spsa_zero_iterations(tmp_path):
    cfg = {
        "model": SMALL_MODEL,
        "cost": SMALL_COST,
        "iterations": 0,
        "init_phi": [0.4],
        "priors": 4,
        "seed": 0,
    }
    ref = write_config(tmp_path, "zeroiter", cfg)
    assert cli.main(["spsa", "--config", ref, "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "zeroiter_policy.json").read_text())
    assert summary["theta"] == [pytest.approx(0.16)]


def test_simulate_requires_positive_count(tmp_path, capsys):
    cfg = {
        "model": SMALL_MODEL,
        "cost": SMALL_COST,
        "policy": {"theta": [0.3]},
        "trajectories": 0,
    }
    ref = write_config(tmp_path, "zerosim", cfg)
    assert cli.main(["simulate", "--config", ref, "--out", str(tmp_path)]) == 2
    assert "positive" in capsys.readouterr().err


def test_simulate_from_solution_csv(tmp_path):
    solve_cfg = {
        "model": SMALL_MODEL,
        "cost": SMALL_COST,
        "grid": {"m": 200},
        "tol": 1e-10,
    }
    ref = write_config(tmp_path, "base", solve_cfg)
    assert cli.main(["solve", "--config", ref, "--out", str(tmp_path)]) == 0
    sim_cfg = {
        "model": SMALL_MODEL,
        "cost": SMALL_COST,
        "policy": {"solution": str(tmp_path / "base_solution.csv")},
        "trajectories": 500,
        "max_steps": 2000,
        "seed": 7,
        "record": 1,
    }
    ref2 = write_config(tmp_path, "simrun", sim_cfg)
    assert cli.main(["simulate", "--config", ref2, "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "simrun_summary.json").read_text())
    assert summary["trajectories"] == 500
    assert summary["criterion"] > 0
    traj = (tmp_path / "simrun_trajectory0.csv").read_text().splitlines()
    assert traj[0] == "step,state,observation,belief0,belief1,action"


def test_seed_override_changes_output(tmp_path):
    cfg = {
        "model": SMALL_MODEL,
        "cost": SMALL_COST,
        "policy": {"theta": [0.3]},
        "trajectories": 200,
        "max_steps": 1000,
        "seed": 1,
    }
    ref = write_config(tmp_path, "seeded", cfg)
    out1, out2, out3 = (tmp_path / n for n in ("s1", "s2", "s3"))
    assert cli.main(["simulate", "--config", ref, "--out", str(out1)]) == 0
    assert cli.main(["simulate", "--config", ref, "--out", str(out2)]) == 0
    assert cli.main(["simulate", "--config", ref, "--seed", "2", "--out", str(out3)]) == 0
    a = (out1 / "seeded_summary.json").read_bytes()
    assert a == (out2 / "seeded_summary.json").read_bytes()
    assert a != (out3 / "seeded_summary.json").read_bytes()


def test_phdist_command(tmp_path):
    cfg = {"model": SMALL_MODEL, "k_max": 40}
    ref = write_config(tmp_path, "dist", cfg)
    assert cli.main(["phdist", "--config", ref, "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "dist_phdist.csv").read_text().splitlines()
    assert rows[0] == "k,pmf,cumulative"
    assert len(rows) == 42
    pmf1 = float(rows[2].split(",")[1])
    assert pmf1 == pytest.approx(0.3, abs=1e-12)


def test_sweep_command_unordered_pair(tmp_path, capsys):
    cfg = {
        "cost": {"family": "quickest_predictive", "alpha": 0.0, "beta": 1.0, "d": 0.9, "rho": 0.9},
        "models": [
            {"label": "lo", "model": {
                "transition": [[1, 0], [0.5, 0.5]], "initial": [0, 1],
                "observation": {"discrete": [[0.8, 0.2], [0.2, 0.8]]}}},
            {"label": "hi", "model": {
                "transition": [[1, 0], [0.1, 0.9]], "initial": [0, 1],
                "observation": {"discrete": [[0.8, 0.2], [0.2, 0.8]]}}},
        ],
        "grid": {"m": 50},
        "tol": 1e-9,
    }
    ref = write_config(tmp_path, "sweepx", cfg)
    assert cli.main(["sweep", "--config", ref, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "not comparable" in out
    verdict = json.loads((tmp_path / "sweepx_verdict.json").read_text())
    assert verdict["verdict"] == "not comparable"
    assert (tmp_path / "sweepx_lo_solution.csv").exists()


@pytest.mark.parametrize(
    "name,command",
    [
        ("fig3a", "solve"), ("fig3b", "solve"), ("fig3c", "solve"), ("fig3d", "solve"),
        ("fig4a", "solve"), ("fig4c", "solve"),
        ("fig5", "sweep"), ("fig6", "sweep"),
        ("blackwell", "solve"), ("social_optimum", "solve"),
        ("ph_example", "phdist"),
    ],
)
def test_bundled_configs_run_end_to_end(tmp_path, name, command):
    assert cli.main([command, "--config", name, "--out", str(tmp_path)]) == 0
    assert any(tmp_path.iterdir())
