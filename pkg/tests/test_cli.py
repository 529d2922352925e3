from __future__ import annotations

import json

import pytest

from proca_lab import bundled_scenario
from proca_lab.cli import main

SCENARIO = str(bundled_scenario("flat_1p1_small.json"))


def run(tmp_path, *args):
    out = tmp_path / "report.json"
    code = main([*args, "--scenario", SCENARIO, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_single_suite_report(tmp_path):
    code, report = run(tmp_path, "run", "--suite", "complex")
    assert code == 0
    assert report["schema_version"] == 1
    assert report["suites"] == ["complex"]
    assert report["all_pass"]
    for c in report["checks"]:
        assert set(c) >= {"check_id", "paper_anchor", "residual", "threshold", "pass"}


def test_moller_and_state_shortcuts(tmp_path):
    code, report = run(tmp_path, "state-verify")
    assert code == 0 and report["suites"] == ["states"]


def test_tight_tolerance_fails(tmp_path):
    code, report = run(tmp_path, "run", "--suite", "spectral", "--tolerance-scale", "1e-30")
    assert code == 1
    assert not report["all_pass"]


def test_bad_arguments(tmp_path, capsys):
    assert main(["run", "--scenario", SCENARIO, "--suite", "nonsense"]) == 2
    assert main(["run", "--scenario", SCENARIO, "--tolerance-scale", "0"]) == 2
    assert main(["run", "--scenario", SCENARIO, "--seed", "-1"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["run", "--scenario", str(tmp_path / "missing.json")]) == 2


def test_malformed_scenario(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad", "mesh": {"dim": 3, "sizes": [4]}}))
    assert main(["run", "--scenario", str(path), "--suite", "complex"]) == 2


def test_inadmissible_datum_fails_cauchy(tmp_path):
    payload = json.loads(open(SCENARIO).read())
    payload["cauchy"] = dict(payload.get("cauchy", {}), datum="inadmissible")
    path = tmp_path / "inadmissible.json"
    path.write_text(json.dumps(payload))
    out = tmp_path / "r.json"
    assert main(["run", "--scenario", str(path), "--suite", "cauchy", "--out", str(out)]) == 1
    failed = [c["check_id"] for c in json.loads(out.read_text())["checks"] if not c["pass"]]
    assert failed


@pytest.mark.parametrize("artifact,header", [("spectrum", "index,eigenvalue"), ("impulse", "t,x,A0,A1"), ("frequency", "frequency,magnitude")])
def test_dumps(tmp_path, artifact, header):
    out = tmp_path / f"{artifact}.csv"
    assert main(["dump", artifact, "--scenario", SCENARIO, "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == header
