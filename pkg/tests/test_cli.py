from __future__ import annotations

import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from hybrid_testgen import cli
from hybrid_testgen.cli import (
    EXIT_INTERNAL, EXIT_OK, EXIT_REACHED_ERROR, EXIT_USAGE, main, read_testcase_xml,
)
from conftest import CORPUS

QUADRATIC = os.path.join(CORPUS, "quadratic.c")


def write_case(path, values):
    path.write_text(cli.testcase_xml(values))
    return str(path)


def test_replay_of_error_input_exits_10(tmp_path, capsys):
    case = write_case(tmp_path / "t.xml", (1, 0, 1))
    assert main(["replay", "--program", QUADRATIC, "--testcase", case]) == EXIT_REACHED_ERROR
    out = capsys.readouterr().out
    assert "goals: 0,5,1" in out
    assert "outcome: ReachedError" in out
    assert "consumed: 12 bytes (3 values)" in out


def test_replay_of_normal_input_exits_0(tmp_path, capsys):
    case = write_case(tmp_path / "t.xml", (0, 0, 0, 5))
    assert main(["replay", "--program", QUADRATIC, "--testcase", case]) == EXIT_OK
    assert "goals: 0,4,6,9,2,10" in capsys.readouterr().out


def test_replay_notes_exhausted_input(tmp_path, capsys):
    case = write_case(tmp_path / "t.xml", (0,))
    main(["replay", "--program", QUADRATIC, "--testcase", case])
    assert "input exhausted" in capsys.readouterr().out


def test_rank_prints_both_orders(capsys):
    assert main(["rank", "--program", QUADRATIC]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "3,7,10,11,1,2,8,9,6,4,5,0"
    assert main(["rank", "--program", QUADRATIC, "--strategy", "rank"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "10,8,1,2,4,6,3,7,11,5,9,0"
    assert "GOAL_10: kind=IfThen depth=6 power=5 rank=30" in lines[1]


@pytest.mark.parametrize("argv", [
    [],
    ["generate"],
    ["rank", "--program", "/nonexistent.c"],
    ["rank", "--program", QUADRATIC, "--strategy", "bogus"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_parse_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.c"
    bad.write_text("int main() { int a[2]; return 0; }")
    assert main(["rank", "--program", str(bad)]) == EXIT_USAGE
    assert "outside the MiniC subset" in capsys.readouterr().err


def test_malformed_testcase_exits_2(tmp_path):
    bad = tmp_path / "t.xml"
    bad.write_text("<testcase><input>x</input></testcase>")
    assert main(["replay", "--program", QUADRATIC, "--testcase", str(bad)]) == EXIT_USAGE


def test_bad_budget_file_exits_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"unknown": 1}))
    assert main(["generate", "--program", QUADRATIC, "--budget-file", str(cfg),
                 "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_internal_errors_exit_1(monkeypatch, tmp_path):
    def boom(*a, **k):
        raise RuntimeError("boom")
    monkeypatch.setattr("hybrid_testgen.cli.run_pipeline", boom)
    assert main(["generate", "--program", QUADRATIC, "--out", str(tmp_path)]) == EXIT_INTERNAL


def test_testcase_xml_round_trip(tmp_path):
    path = write_case(tmp_path / "t.xml", (3, -4, 0))
    assert read_testcase_xml(path) == (3, -4, 0)


def test_generate_writes_suite_and_report(tmp_path, monkeypatch, capsys):
    out = tmp_path / "ignored"
    store = tmp_path / "store"
    monkeypatch.setenv("HTG_STORE_DIR", str(store))
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "86400")
    rc = main(["generate", "--program", QUADRATIC, "--iterations", "--rng-seed", "1",
               "--out", str(out)])
    assert rc == EXIT_OK
    assert not out.exists()
    suite = store / "test-suite"
    meta = ET.parse(suite / "metadata.xml").getroot()
    assert meta.findtext("creationtime") == "1970-01-02T00:00:00Z"
    assert meta.findtext("programfile") == "quadratic.c"
    assert meta.findtext("architecture") == "32bit"
    cases = sorted(p for p in os.listdir(suite) if p.startswith("testcase-"))
    assert cases
    for name in cases:
        root = ET.parse(suite / name).getroot()
        assert root.tag == "testcase" and all(el.tag == "input" for el in root)
    report = json.loads((store / "coverage_report.json").read_text())
    assert (report["goals_total"], report["goals_covered"], report["bugs"]) == (12, 10, 2)
    assert report["goals_unreachable"] == 0
    status = {g["id"]: g["status"] for g in report["goals"]}
    assert status[3] == status[7] == "uncovered"
    assert len([p for p in os.listdir(store / "bugs") if p.endswith(".xml")]) == 2
    assert "covered 10/12 goals" in capsys.readouterr().out


def test_error_mode_metadata(tmp_path):
    assert main(["generate", "--program", QUADRATIC, "--iterations", "--mode", "error",
                 "--out", str(tmp_path)]) == EXIT_OK
    meta = ET.parse(tmp_path / "test-suite" / "metadata.xml").getroot()
    assert "reach_error" in meta.findtext("specification")
    assert meta.findtext("creationtime") == "1970-01-01T00:00:00Z"


def test_unreachable_status_in_report(tmp_path):
    prog = tmp_path / "dead.c"
    prog.write_text("int main() { int x = __VERIFIER_nondet_int(); if (x > 5 && x < 3) { x = 0; } return 0; }")
    assert main(["generate", "--program", str(prog), "--iterations", "--out", str(tmp_path / "o")]) == EXIT_OK
    report = json.loads((tmp_path / "o" / "coverage_report.json").read_text())
    assert report["goals_unreachable"] == 1
    assert [g["status"] for g in report["goals"] if g["kind"] == "IfThen"] == ["unreachable"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hybrid_testgen", "rank", "--program", QUADRATIC],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout.startswith("3,7,10")
