import json

import pytest

from qdual.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_duality_json(capsys):
    code, out = run(capsys, "duality", "--state", "|4,2> + |2,4>", "--k", "2")
    data = json.loads(out)
    assert code == 0 and data["V"] == pytest.approx(6 / 7)
    assert data["entanglement_by_visibility"]["violated"]


def test_global_flags_before_or_after_subcommand(capsys):
    _, a = run(capsys, "--seed", "9", "--format", "csv", "eraser", "--shots", "50")
    _, b = run(capsys, "eraser", "--shots", "50", "--seed", "9", "--format", "csv")
    assert a == b and a.startswith("branch_p,")


def test_criteria_run(capsys):
    code, out = run(capsys, "criteria", "run", "--state", "ghz3", "--criterion", "classify")
    assert code == 0 and json.loads(out)["label"] == "GME"
    _, out = run(capsys, "criteria", "run", "--state", "bell:psi-", "--criterion", "chsh")
    assert json.loads(out)["violated"]
    _, out = run(capsys, "criteria", "run", "--state", "werner:phi+:0.2", "--criterion", "ppt")
    assert not json.loads(out)["npt"]


def test_state_file(tmp_path, capsys):
    from qdual.qstate import bell

    path = tmp_path / "rho.json"
    path.write_text(bell("psi+").to_json())
    _, out = run(capsys, "criteria", "run", "--state", str(path), "--criterion", "cauchy_schwarz")
    assert json.loads(out)["violated"]


def test_bad_state_exit_code(capsys):
    code = main(["criteria", "run", "--state", "nonsense", "--criterion", "ppt"])
    assert code == 2
    assert "StateParseError" in capsys.readouterr().err


def test_classical_bound(capsys):
    _, out = run(capsys, "classical-bound")
    data = json.loads(out)
    assert data["min"] == pytest.approx(-1) and data["max"] == pytest.approx(-0.12132034, abs=1e-8)
    _, out = run(capsys, "classical-bound", "--fixed", "E11=-1,E22=-1,E21=-1")
    assert json.loads(out)["min"] == pytest.approx(-1) and json.loads(out)["max"] == pytest.approx(-1)


def test_reproduce_exit_codes(capsys):
    code, out = run(capsys, "reproduce", "table1")
    assert code == 0 and out.startswith("[pass] table1")
    code, out = run(capsys, "reproduce", "table3", "--format", "json")
    assert code == 1 and json.loads(out)["status"] == "FAIL"


def test_figure6_csv_to_file(tmp_path, capsys):
    path = tmp_path / "fig6.csv"
    code, _ = run(capsys, "collective", "figure6", "--n", "8", "--format", "csv", "--out", str(path))
    lines = path.read_text().splitlines()
    assert code == 0 and lines[0] == "wavelength,configuration,value"
    assert {line.split(",")[1] for line in lines[1:]} == {"product", "nearest_singlets", "distant_singlets", "bound_w2"}


def test_depth_curve(capsys):
    code, out = run(capsys, "collective", "depth-curve", "--n", "4", "--k", "1", "--points", "3", "--restarts", "2", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "x,value,configuration"
