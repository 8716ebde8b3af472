from __future__ import annotations

import json
import subprocess
import sys
from importlib import resources

import pytest

from bvtate.cli import main

MODELS = resources.files("bvtate") / "models"


def model(name: str) -> str:
    return str(MODELS / name)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out) if out else None, err


def test_jacobian(capsys):
    code, rep, _ = run_json(capsys, "jacobian", "--model", model("u2_case3.json"))
    assert code == 0
    assert rep["gcd"] == "M4"
    assert rep["u2"]["case"] == 3
    assert rep["cofactors"]["M1"] == "4*M1*M4"


def test_tate_roster(capsys):
    code, rep, _ = run_json(capsys, "tate", "--model", model("u2_case2.json"))
    assert code == 0
    assert rep["status"] == "terminated"
    assert rep["roster_sizes"] == [4, 3, 1]
    assert rep["delta_squared_zero"]


def test_tate_cap_exit_code(capsys):
    code, rep, _ = run_json(capsys, "tate", "--model", model("u2_case3.json"), "--cap", "2")
    assert code == 3
    assert rep["status"] == "cap"


def test_extend_success(capsys):
    code, rep, _ = run_json(capsys, "extend", "--model", model("u2_case2.json"))
    assert code == 0
    assert rep["status"] == "success"
    assert rep["frame"] == "closed-form"
    assert rep["residual"] == "0"
    assert rep["reducibility_level"] == 1


def test_extend_with_injected_family(capsys):
    code, rep, _ = run_json(capsys, "extend", "--model", model("u2_case2_T.json"))
    assert code == 0
    closed = (MODELS / "u2_case2_closed_form.txt").read_text().strip()
    assert rep["action"] == closed


def test_extend_not_liftable(capsys):
    code, rep, _ = run_json(capsys, "extend", "--model", model("u2_case2.json"), "--drop", "Cs3")
    assert code == 2
    assert rep["status"] == "not_liftable"
    assert rep["ghost_monomial"] == "C1*C2"
    assert rep["certificate"] == "M1*Ms2*C1*C2 - M2*Ms1*C1*C2"


def test_extend_max_q(capsys):
    code, rep, _ = run_json(capsys, "extend", "--model", model("u2_case3.json"), "--max-q", "1")
    assert code == 3
    assert rep["status"] == "max_q"


def test_check_cme(capsys):
    code, rep, _ = run_json(
        capsys, "check-cme", "--model", model("u2_case2.json"), "--action", model("u2_case2_closed_form.txt")
    )
    assert code == 0 and rep["holds"]
    code, rep, _ = run_json(
        capsys, "check-cme", "--model", model("u2_case2.json"), "--action", model("u2_case2_slin.txt")
    )
    assert code == 4
    assert not rep["holds"]
    assert rep["residual"].startswith("2*a1*a2*M1*Ms2*C1*C2")


def test_check_cme_action_without_ghosts(capsys, tmp_path):
    f = tmp_path / "s0.txt"
    f.write_text("M4^4 + (M1^2 + M2^2 + M3^2)^2\n")
    code, rep, _ = run_json(capsys, "check-cme", "--model", model("u2_case2.json"), "--action", str(f))
    assert code == 0 and rep["residual"] == "0"


def test_brst(capsys):
    code, rep, _ = run_json(
        capsys, "brst", "--model", model("u2_case2.json"), "--action", model("u2_case2_closed_form.txt"),
        "--target", "Ms1*C2",
    )
    assert code == 0
    assert rep["d2_target"] == "0"
    assert rep["cme_holds"]


def test_declared_variable_model(capsys, tmp_path):
    doc = {
        "variables": [
            {"name": "x", "ghost_degree": 0, "parity": 0, "partner": "xs"},
            {"name": "xs", "ghost_degree": -1, "parity": 1, "partner": "x"},
        ],
        "action": "x^3",
    }
    m = tmp_path / "m.json"
    m.write_text(json.dumps(doc))
    a = tmp_path / "a.txt"
    a.write_text("x^3")
    code, rep, _ = run_json(capsys, "brst", "--model", str(m), "--action", str(a), "--target", "xs")
    assert code == 0
    assert rep["frame"] == "declared"
    assert rep["d_target"] == "3*x^2"


@pytest.mark.parametrize("case, code", [(2, 0), (3, 0)])
def test_u2_fixtures(capsys, case, code):
    got, rep, _ = run_json(capsys, "u2", "--case", str(case))
    assert got == code
    assert all(rep["checks"].values())


def test_u2_case1_reports_roster_mismatch(capsys):
    code, rep, _ = run_json(capsys, "u2", "--case", "1")
    assert code == 4
    assert rep["roster_sizes"] == [4, 3]
    assert rep["expected_roster_sizes"] == [4]
    assert not rep["checks"]["roster_matches_closed_form"]


def test_json_is_byte_identical_across_runs(capsys):
    first = run(capsys, "u2", "--case", "2", "--seed", "5", "--json")
    second = run(capsys, "u2", "--case", "2", "--seed", "5", "--json")
    assert first == second


def test_text_output(capsys):
    code, out, _ = run(capsys, "tate", "--model", model("u2_case2.json"))
    assert code == 0
    assert "roster_sizes: [4, 3, 1]" in out
    assert "name: Es" in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nope"],
        ["tate"],
        ["u2", "--case", "7"],
        ["tate", "--model", "/nonexistent.json"],
        ["extend", "--model", "MODEL", "--max-q", "0"],
        ["check-cme", "--model", "MODEL"],
    ],
)
def test_usage_errors(capsys, argv):
    argv = [model("u2_case2.json") if a == "MODEL" else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "error" in err


def test_parse_error_in_action_file(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("M1 M2")
    code, _, err = run(capsys, "check-cme", "--model", model("u2_case2.json"), "--action", str(f))
    assert code == 1
    assert "position 3" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bvtate", "jacobian", "--model", model("u2_case1.json"), "--json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["u2"]["case"] == 1
