"""The command-line front end: reports, exit codes and determinism."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from sqlift.cli import main

EXAMPLES = Path(__file__).resolve().parent.parent / "src" / "sqlift" / "data"


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def report(*args):
    res = invoke(*args)
    assert res.exit_code == 0, res.output
    return json.loads(res.output)


def test_f0():
    out = report("f0", "--prec", 6)
    assert out["outputs"]["f0"]["terms"] == [["-3", "1"], ["1", "-248"], ["4", "26752"], ["5", "-85995"]]
    assert out["ok"]


def test_classnum():
    assert report("classnum", "--D", -23)["outputs"]["H"]["value"] == "3"


def test_frame_shape():
    out = report("frame-shape", "--input", EXAMPLES / "th_248_2a.json")
    assert out["outputs"]["frame_shape"]["value"] == "1^-8 2^128"


def test_weil():
    assert report("weil", "--m", 1)["ok"]


def test_sq_on_theta_family():
    assert report("sq", "--input", EXAMPLES / "z2_theta.json", "--prec", 3)["ok"]


def test_trace_of_j_example():
    out = report("trace", "--D1", 5)
    assert float(out["outputs"]["trace"]["value"]) == -257985.0
    assert {t["weight"] for t in out["outputs"]["divisor"]} == {"3", "-3"}


@pytest.mark.parametrize("name", sorted(p.name for p in EXAMPLES.glob("*.json")))
def test_shipped_examples_validate(name):
    assert report("validate", "--input", EXAMPLES / name)["ok"]


def test_failing_check_exits_1(tmp_path):
    # a trace function of Z/2 that is not the character of any virtual module
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"order": 2, "traces": {"1": 1, "2": 0}, "virtual": True}))
    res = invoke("validate", "--input", path)
    assert res.exit_code == 1
    assert json.loads(res.stdout)["ok"] is False


def test_family_with_wrong_support_exits_1(tmp_path):
    # component 1 of an index 1 form lives on exponents 1/4 mod 1
    data = json.loads((EXAMPLES / "family_n2.json").read_text())
    comps = data["members"]["1"]["components"]
    comps["0"]["terms"][0][1] = str(int(comps["0"]["terms"][0][1]) + 1)
    comps["1"] = comps["0"]
    path = tmp_path / "asym.json"
    path.write_text(json.dumps(data))
    res = invoke("validate", "--input", path)
    assert res.exit_code == 1
    assert "support" in res.stderr


def test_schema_error_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"order": 2}))
    res = invoke("frame-shape", "--input", path)
    assert res.exit_code == 2
    assert "traces" in res.stderr


@pytest.mark.parametrize("args", [("classnum", "--D", 5), ("f0", "--prec", "abc")])
def test_bad_arguments_exit_2(args):
    assert invoke(*args).exit_code == 2


@pytest.mark.parametrize("args", [("f0", "--prec", 10), ("weil", "--m", 2, "--matrices"), ("trace", "--D1", 8)])
def test_reports_are_deterministic(args):
    a, b = invoke(*args), invoke(*args)
    assert a.exit_code == 0
    assert a.stdout_bytes == b.stdout_bytes
