from __future__ import annotations

import io
import json

import pytest

from nfdiag import ratexpr
from nfdiag.cli import PRESETS, main
from nfdiag.ratexpr import RationalExpr


def run(argv, capsys, monkeypatch, stdin=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def tree_file(tmp_path):
    def write(doc, name="tree.json"):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)
    return write


def test_preset_pipes_into_diagonalize(capsys, monkeypatch):
    code, out, _ = run(["preset", "ex1"], capsys, monkeypatch)
    assert code == 0
    code, out, _ = run(["diagonalize", "-"], capsys, monkeypatch, stdin=out)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["generators"]) == 1
    assert doc["generators"][0]["eigenvalue_text"] == "-1"
    assert doc["report"]["summary"] == "pass"


def test_diagonalize_output_reparses(capsys, monkeypatch):
    code, out, _ = run(["diagonalize", "-"], capsys, monkeypatch, stdin=json.dumps(PRESETS["ex2"]))
    doc = json.loads(out)
    for g in doc["generators"]:
        assert isinstance(ratexpr.from_json(g["expr"]), RationalExpr)
    assert set(doc["inverse"]) == {"b.0", "b.1"}
    for e in doc["inverse"].values():
        assert isinstance(ratexpr.from_json(e), RationalExpr)


def test_order_prints_three(capsys, monkeypatch):
    code, out, _ = run(["order", "-"], capsys, monkeypatch, stdin=json.dumps(PRESETS["ex2"]))
    assert code == 0 and out.strip() == "3"


def test_validate_reports_all_violations(tree_file, capsys, monkeypatch):
    bad = {"n": 4, "vertices": [{"id": "b", "parent": "a", "tau": 1, "gamma": 4, "beta": 3, "alpha": 4},
                                {"id": "c", "parent": "x", "tau": 1, "gamma": 2, "beta": 2, "alpha": 2}],
           "pairs": []}
    code, _, err = run(["validate", tree_file(bad)], capsys, monkeypatch)
    assert code == 1
    assert "a->b" in err and "orphan" in err


def test_validate_bad_json(tree_file, tmp_path, capsys, monkeypatch):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    code, _, err = run(["validate", str(p)], capsys, monkeypatch)
    assert code == 1 and "invalid JSON" in err


def test_missing_file(capsys, monkeypatch):
    code, _, err = run(["validate", "/nonexistent/tree.json"], capsys, monkeypatch)
    assert code == 1 and "cannot read" in err


def test_validate_json_format(tree_file, capsys, monkeypatch):
    code, out, _ = run(["validate", "--format", "json", tree_file(PRESETS["ex2"])], capsys, monkeypatch)
    doc = json.loads(out)
    assert code == 0 and doc["valid"] and doc["n1"] == 3 and doc["letters"] == 2


def test_phi_text(tree_file, capsys, monkeypatch):
    code, out, _ = run(["phi", tree_file(PRESETS["ex1"])], capsys, monkeypatch)
    assert code == 0
    assert "b.0 ->" in out and "c" in out


def test_lambda_json(tree_file, capsys, monkeypatch):
    code, out, _ = run(["lambda", "--format", "json", tree_file(PRESETS["ex2"])], capsys, monkeypatch)
    assert json.loads(out)["vertices"]["b"] == {"lambda": 3, "u": 1}


def test_verify_exit_codes(tree_file, capsys, monkeypatch):
    path = tree_file(PRESETS["ex2"])
    code, out, _ = run(["verify", path, "--sizes", "3,4", "--samples", "3"], capsys, monkeypatch)
    assert code == 0 and out.startswith("pass")
    code, out, _ = run(["verify", path, "--sizes", "3,4", "--samples", "3", "--inject", "vandermonde"],
                       capsys, monkeypatch)
    assert code == 2 and "FAIL" in out


def test_verify_json_report(tree_file, tmp_path, capsys, monkeypatch):
    report = tmp_path / "report.json"
    code, _, _ = run(["verify", tree_file(PRESETS["ex1"]), "--samples", "2", "--json", str(report)],
                     capsys, monkeypatch)
    doc = json.loads(report.read_text())
    assert code == 0 and doc["summary"] == "pass"
    code, out, _ = run(["verify", tree_file(PRESETS["ex1"]), "--samples", "2", "--json", "-"], capsys, monkeypatch)
    assert json.loads(out)["summary"] == "pass"


def test_twist_override(tree_file, capsys, monkeypatch):
    path = tree_file(PRESETS["ex1"])
    tw = tree_file({"twist": {"b.0": 3}}, "twist.json")
    code, out, _ = run(["phi", path, "--twist", tw], capsys, monkeypatch)
    assert code == 0 and "t_b_0" in out


def test_bad_twist_is_invalid_input(tree_file, capsys, monkeypatch):
    tw = tree_file({"twist": {"zz.0": "c"}}, "twist.json")
    code, _, err = run(["phi", tree_file(PRESETS["ex1"]), "--twist", tw], capsys, monkeypatch)
    assert code == 1 and "twist" in err


def test_bad_inject_is_usage_error(tree_file, capsys, monkeypatch):
    with pytest.raises(SystemExit) as exc:
        main(["verify", tree_file(PRESETS["ex1"]), "--inject", "nonsense"])
    assert exc.value.code == 2
