import json
import subprocess

import numpy as np
import pytest

from conftest import lp_game_value
from lmodecomp.cli import run

PENNIES = [[1.0, -1.0], [-1.0, 1.0]]


def write_spec(tmp_path, obj, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_matrix_game_converges_exit_zero(tmp_path, capsys):
    spec = write_spec(tmp_path, {"S": PENNIES})
    report_path = tmp_path / "report.json"
    code = run(["matrix-game", "--spec", spec, "--gap-threshold", "1e-6",
                "--eps", "1e-7", "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["command"] == "matrix-game"
    assert report["converged"] is True
    assert abs(report["value"]) <= 1e-6
    assert min(report["gap_bound"], report["gap_exact"]) <= 1e-6
    out = capsys.readouterr().out
    assert "converged" in out


def test_missing_spec_exit_one(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["matrix-game", "--spec", str(tmp_path / "nope.json")])
    assert "cannot read spec" in str(exc.value)


def test_malformed_spec_exit_one(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"S": [[1, 2],\n [3, }')
    with pytest.raises(SystemExit) as exc:
        run(["matrix-game", "--spec", str(path)])
    assert "bad.json:2" in str(exc.value)


def test_invalid_spec_contents_exit_one(tmp_path, capsys):
    spec = write_spec(tmp_path, {"A": [[1.0, 0.0]], "D": [[1.0], [0.0]]})
    code = run(["matrix-game", "--spec", spec])
    assert code == 1
    assert "invalid spec" in capsys.readouterr().err


def test_budget_exhausted_exit_two(tmp_path, capsys):
    spec = write_spec(tmp_path, {"S": PENNIES})
    code = run(["matrix-game", "--spec", spec, "--max-steps", "8",
                "--gap-threshold", "1e-12", "--eps", "1e-13"])
    assert code == 2
    assert "step budget exhausted" in capsys.readouterr().out


def test_reports_deterministic_up_to_wall_time(tmp_path):
    spec = write_spec(tmp_path, {"m": 2, "caps_a": [2, 2], "caps_d": [2, 2],
                                 "costs_a": [1, 1], "costs_d": [1, 1],
                                 "budget_a": 2, "budget_d": 2,
                                 "omega": {"rank1_seed": 3}})
    reports = []
    for name in ("r1.json", "r2.json"):
        path = tmp_path / name
        run(["blotto", "--spec", spec, "--report", str(path)])
        obj = json.loads(path.read_text())
        obj.pop("wall_time_s")
        reports.append(obj)
    assert reports[0] == reports[1]


def test_blotto_report_value_matches_lp(tmp_path):
    from lmodecomp.blotto import blotto_from_json, build_blotto
    from lmodecomp.oracles import enumerate_columns

    obj = {"m": 2, "caps_a": [2, 2], "caps_d": [2, 2], "costs_a": [1, 1],
           "costs_d": [1, 1], "budget_a": 2, "budget_d": 2,
           "omega": {"rank1_seed": 11}}
    spec = write_spec(tmp_path, obj)
    report_path = tmp_path / "report.json"
    code = run(["blotto", "--spec", spec, "--eps", "2e-7",
                "--gap-threshold", "4e-7", "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    game = build_blotto(blotto_from_json(obj))
    _, cols_a = enumerate_columns(game.A)
    _, cols_d = enumerate_columns(game.D)
    assert abs(report["value"] - lp_game_value(cols_a.T @ cols_d)) <= 1e-6


def test_affine_vi_subcommand(tmp_path):
    spec = write_spec(tmp_path, {"S": [[0.0, 0.0], [0.0, 0.0]], "s": [1.0, -1.0],
                                 "H": {"simplex": 2}})
    report_path = tmp_path / "report.json"
    code = run(["affine-vi", "--spec", spec, "--gap-threshold", "1e-8",
                "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert np.allclose(report["atoms"]["eta"], [0.0, 1.0], atol=1e-8)
    assert report["gap_exact"] <= 1e-8


def test_nash_subcommand(tmp_path):
    Z = [[0.0, 0.0], [0.0, 0.0]]
    eye = [[1.0, 0.0], [0.0, 1.0]]
    neg = (-np.asarray(PENNIES).T).tolist()
    spec = write_spec(tmp_path, {"D": [eye, eye], "M": [[Z, PENNIES], [neg, Z]]})
    report_path = tmp_path / "report.json"
    code = run(["nash", "--spec", spec, "--gap-threshold", "1e-6",
                "--eps", "1e-7", "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["gap_exact"] <= 1e-6
    weights = {tuple(tuple(b) for b in a["index"]): a["weight"]
               for a in report["atoms"]["eta"]}
    assert abs(sum(weights.values()) - 1.0) < 1e-9


def test_console_script_runs(tmp_path):
    spec = write_spec(tmp_path, {"S": PENNIES})
    proc = subprocess.run(
        ["lmodecomp", "matrix-game", "--spec", spec, "--gap-threshold", "1e-4"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "matrix-game" in proc.stdout
