from __future__ import annotations

import json
import os

import pytest

from hybrid_testgen.orchestrate import (
    BudgetPlan, Mode, Pipeline, PipelineConfig, config_to_dict, generate_seeds, run_pipeline,
)
from hybrid_testgen.testcase import Provenance

DEAD = """int main() {
  int x = __VERIFIER_nondet_int();
  if (x > 5 && x < 3) { x = 0; }
  if (x == 1234) { reach_error(); }
  return 0;
}
"""


def cfg(mode="branches", **kw):
    return PipelineConfig(budget=BudgetPlan.iterations(mode), rng_seed=1, **kw)


class TestConfig:
    def test_defaults_per_mode(self):
        assert BudgetPlan.defaults("branches").fuzzer_s == 25.0
        b = BudgetPlan.defaults(Mode.COVER_ERROR)
        assert (b.fuzzer_s, b.bmc_s) == (20.0, 65.0)
        assert b.seed_fuzz_s + b.seed_bmc_s == pytest.approx(b.seed_gen_s)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            BudgetPlan(fuzzer_s=0)
        with pytest.raises(ValueError):
            PipelineConfig(width=1)
        with pytest.raises(ValueError):
            PipelineConfig(k=1, light_k=2)

    def test_unknown_keys_raise(self):
        with pytest.raises(ValueError):
            PipelineConfig.from_dict({"rng_sed": 3})
        with pytest.raises(ValueError):
            PipelineConfig.from_dict({"budget": {"fuzzer_seconds": 3}})

    def test_dict_round_trip(self, tmp_path):
        c = PipelineConfig.from_dict({"rng_seed": 9, "width": 16, "strategy": "rank",
                                      "budget": {"mode": "error", "bmc_nodes": 1000}})
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config_to_dict(c)))
        again = PipelineConfig.load(str(path))
        assert again == c
        assert again.mode is Mode.COVER_ERROR and again.budget.bmc_nodes == 1000


def test_quadratic_run(quadratic_source):
    r = run_pipeline(quadratic_source, cfg())
    assert r.covered == set(range(12)) - {3, 7}
    assert r.remaining == [3, 7]
    assert {b.goal_id for b in r.bugs} == {5, 8}
    assert r.coverage == pytest.approx(10 / 12)
    assert r.unreachable == set()  # the loop bound was hit, so nothing is proven


def test_audit_log_fields(quadratic_source):
    r = run_pipeline(quadratic_source, cfg())
    assert [e["seq"] for e in r.audit] == list(range(len(r.audit)))
    for e in r.audit:
        assert {"seq", "phase", "engine", "goal", "cost", "outcome"} <= set(e)
    bmc = [e for e in r.audit if e["engine"] == "bmc"]
    assert bmc and all(e["covered_at_call"] is False for e in bmc)
    assert {e["phase"] for e in r.audit} == {"seed-gen", "main", "selective"}


def test_error_mode_stops_after_first_bug(quadratic_source):
    r = run_pipeline(quadratic_source, cfg("error"))
    assert r.bugs
    assert not [e for e in r.audit if e["phase"] != "seed-gen"]


def test_unreachable_goal_is_proven_and_dropped():
    r = run_pipeline(DEAD, cfg())
    # ids: 0 main start, 1 end of main, 2/3 the impossible branch, 4/5 the error branch
    assert r.unreachable == {2}
    assert r.covered == {0, 1, 3, 4, 5}
    assert r.remaining == []
    assert 2 not in [e["goal"] for e in r.audit if e["phase"] == "main"]
    assert len(r.bugs) == 1 and r.bugs[0].inputs[0] == 1234


def test_store_layout(tmp_path, quadratic_source):
    out = tmp_path / "store"
    run_pipeline(quadratic_source, cfg(), str(out))
    names = set(os.listdir(out))
    assert {"instrumented.c", "goals.json", "goal_queue.json", "ranges.json", "goals_covered.json",
            "goals_unreachable.json", "consumed_input_size", "audit.jsonl", "seeds", "test-cases",
            "bug_reports"} <= names
    assert json.loads((out / "goal_queue.json").read_text()) == [3, 7]
    size = (out / "consumed_input_size").read_text().split("\n")
    assert size[0] == f"{4 * int(size[1].split()[0])} bytes"
    assert int(size[1].split()[0]) >= 4
    assert len(os.listdir(out / "bug_reports")) == 2
    cases = sorted(os.listdir(out / "test-cases"))
    first = json.loads((out / "test-cases" / cases[0]).read_text())
    assert set(first) == {"id", "provenance", "values", "goals_hit"}
    audit = (out / "audit.jsonl").read_text().splitlines()
    assert len(audit) == 8


def test_rerun_into_same_store_cleans_old_outputs(tmp_path, quadratic_source):
    out = str(tmp_path)
    run_pipeline(quadratic_source, cfg(), out)
    n = len(os.listdir(os.path.join(out, "test-cases")))
    run_pipeline("int main() { return 0; }", cfg(), out)
    assert len(os.listdir(os.path.join(out, "test-cases"))) < n


def test_primary_seeds_only_ablation(quadratic_source):
    p = generate_seeds(quadratic_source, cfg(smart_seeds=False))
    assert all(s.provenance is Provenance.PRIMARY for s in p._fuzz_seeds())
    assert not [e for e in p.audit if e["engine"] == "bmc-light"]
    smart = generate_seeds(quadratic_source, cfg())
    assert any(s.smart for s in smart._fuzz_seeds())


def test_primary_seed_patterns(quadratic_source):
    p = Pipeline(quadratic_source, cfg())
    p.analyse()
    seeds = [s.values for s in p.primary_seeds()]
    assert seeds[0] == (0, 0, 0, 0) and seeds[1] == (1, 1, 1, 1)
    assert 1 <= seeds[2][3] <= 100


def test_parallel_jobs_cover_the_same_goals(quadratic_source):
    one = run_pipeline(quadratic_source, cfg())
    two = run_pipeline(quadratic_source, cfg(jobs=2))
    assert one.covered == two.covered


def test_division_by_zero_is_reported_as_a_bug():
    src = """int main() {
  int x = __VERIFIER_nondet_int();
  int y = 100 / x;
  if (y > 50) { return 1; }
  return 0;
}
"""
    r = run_pipeline(src, cfg())
    faults = [b for b in r.bugs if b.kind == "RuntimeFault"]
    assert len(faults) == 1
    assert faults[0].inputs[0] == 0
    assert "division-by-zero" in faults[0].outcome
    assert r.covered == {0, 1, 2, 3}


def test_faults_do_not_stop_error_mode():
    src = """int main() {
  int x = __VERIFIER_nondet_int();
  int y = 7 / x;
  if (x == 77) { reach_error(); }
  return y;
}
"""
    r = run_pipeline(src, cfg("error"))
    assert [b.kind for b in r.bugs] == ["RuntimeFault", "ReachError"]
