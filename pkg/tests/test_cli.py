import json

import pytest

from nugrass.cli import main, parse_index


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_index_parsing():
    assert parse_index("{1,2}|{3}") == ((1, 2), (3,))
    assert parse_index("{}|{1}") == ((), (1,))
    assert parse_index("∅|{1}") == ((), (1,))
    assert parse_index("|{1}") == ((), (1,))
    with pytest.raises(ValueError):
        parse_index("{1,2}")


def test_atlas_command_lists_charts(capsys):
    code, out = run(capsys, "atlas", "-k", "0", "-l", "1", "-m", "1", "-n", "2")
    assert code == 0
    assert "3 charts" in out and "dimension 1|1" in out
    assert "1nu" in out


def test_atlas_command_json(capsys):
    code, out = run(capsys, "atlas", "-k", "1", "-l", "2", "-m", "2", "-n", "3",
                    "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["charts"]) == 10
    assert (data["alpha"], data["beta"]) == (3, 3)


def test_invalid_dimensions_exit_with_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["atlas", "-k", "2", "-l", "1", "-m", "1", "-n", "2"])
    assert exc.value.code == 2


def test_transition_command_prints_the_pasting_map(capsys):
    code, out = run(capsys, "transition", "-k", "0", "-l", "1", "-m", "1", "-n", "2",
                    "--from", "{}|{1}", "--to", "{}|{2}")
    assert code == 0
    assert "x1 -> (1)/(x1)" in out
    assert "e1 -> ((1)/(x1))*e1" in out


def test_verify_cocycle_command_and_exit_code(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code, out = run(capsys, "verify-cocycle", "-k", "0", "-l", "1", "-m", "1",
                    "-n", "2", "-r", "2", "--samples", "5", "--seed", "7",
                    "--out", str(out_file))
    assert code == 0
    data = json.loads(out_file.read_text())
    assert data["ok"] is True
    assert data["suite"] == "cocycle"


def test_reports_are_byte_identical_for_identical_configs(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for path in (a, b):
        run(capsys, "verify-cocycle", "-k", "0", "-l", "1", "-m", "1", "-n", "2",
            "-r", "2", "--samples", "5", "--seed", "3", "--out", str(path))
    assert a.read_bytes() == b.read_bytes()


def test_verify_action_command(capsys):
    code, out = run(capsys, "verify-action", "-k", "0", "-l", "1", "-m", "1",
                    "-n", "2", "-r", "2", "--samples", "5", "--seed", "1",
                    "--format", "json")
    assert code == 0
    data = json.loads(out)
    checks = {r["check"] for r in data["results"]}
    assert "gluing-square" in checks and "axiom-unit" in checks


def test_transitivity_command(capsys):
    code, out = run(capsys, "transitivity", "-k", "0", "-l", "1", "-m", "1",
                    "-n", "2", "-r", "4", "--samples", "5", "--seed", "1")
    assert code == 0
    assert "witness" in out


def test_nulie_command(capsys):
    code, out = run(capsys, "nulie", "-k", "0", "-l", "1", "-m", "1", "-n", "2",
                    "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["dim_even"] >= 1
    assert data["defect_residual"] == "0"


def test_exit_code_contract_for_identity_failures(capsys):
    import argparse

    from nugrass.cli import _emit
    from nugrass.reports import CheckResult, Report

    args = argparse.Namespace(out=None, format="text")
    healthy = Report(suite="demo", config={},
                     results=[CheckResult("a", "i", 3, 3, 0)])
    assert _emit(healthy, args) == 0
    broken = Report(suite="demo", config={},
                    results=[CheckResult("a", "i", 3, 1, 2)])
    assert _emit(broken, args) == 1
    capsys.readouterr()
