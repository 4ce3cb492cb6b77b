from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from hybrid_testgen.analysis import InputRange, extract_ranges, plan_loop_bounds
from hybrid_testgen.fuzz import MUTATION_OPS, FuzzBudget, mutate, run_fuzzer, run_selective_fuzzer
from hybrid_testgen.interpreter import execute
from hybrid_testgen.testcase import Provenance, Seed

RANGES = [InputRange(0, -10, 10, frozenset({0})), InputRange(1, 1, 100, points=(42,))]


@settings(max_examples=200)
@given(st.lists(st.integers(-10, 10), max_size=6), st.integers(0, 10_000),
       st.sampled_from(MUTATION_OPS + (None,)), st.integers(0, 3))
def test_mutants_respect_ranges_and_lengths(values, seed, op, min_len):
    rng = random.Random(seed)
    values = [RANGES[min(i, 1)].clamp(v) for i, v in enumerate(values)]
    out = mutate(values, RANGES, rng, min_len=min_len, max_len=6, others=[(5, 5, 5)], op=op)
    assert min_len <= len(out) <= 6
    for i, v in enumerate(out):
        assert v in RANGES[min(i, 1)]


def test_unknown_mutation_is_rejected():
    with pytest.raises(ValueError):
        mutate((1,), RANGES, random.Random(0), op="bogus")


def test_budget_validation():
    with pytest.raises(ValueError):
        FuzzBudget()
    with pytest.raises(ValueError):
        FuzzBudget(iterations=1, min_case_len=5, max_case_len=2)
    b = FuzzBudget.for_consumed(3, iterations=10)
    assert (b.min_case_len, b.max_case_len) == (3, 12)


def fuzz_quadratic(quadratic, seed, iterations=4000, target=10):
    program, tree = quadratic
    ranges = extract_ranges(program, 32)
    seeds = [Seed((0, 0, 0, 0), Provenance.PRIMARY), Seed((1, 1, 1, 1), Provenance.PRIMARY)]
    return run_fuzzer(program, tree, seeds, FuzzBudget.for_consumed(4, iterations=iterations), ranges,
                      target_goal=target, rng=random.Random(seed), width=32,
                      loop_plan=plan_loop_bounds(program))


def test_fuzzer_reaches_the_root_goal(quadratic):
    res = fuzz_quadratic(quadratic, 1)
    assert 10 in res.covered
    assert not res.exhausted
    assert res.iterations <= 4000
    program, _tree = quadratic
    assert any(10 in execute(program, c.values, width=32).goals_hit for c in res.testcases)


def test_fuzzer_records_each_error_site_once(quadratic):
    res = fuzz_quadratic(quadratic, 2, iterations=500, target=None)
    sites = [site for _v, site in res.errors]
    assert len(sites) == len(set(sites))
    assert 8 in sites or 5 in sites


def test_fuzzer_is_deterministic(quadratic):
    a = fuzz_quadratic(quadratic, 7, iterations=300, target=None)
    b = fuzz_quadratic(quadratic, 7, iterations=300, target=None)
    assert [c.values for c in a.testcases] == [c.values for c in b.testcases]
    assert [s.values for s in a.seeds] == [s.values for s in b.seeds]


def test_iteration_budget_is_a_hard_cap(quadratic):
    res = fuzz_quadratic(quadratic, 3, iterations=25, target=3)
    assert res.iterations == 25
    assert res.exhausted


def test_selective_fuzzer_samples_from_ranges(quadratic):
    program, tree = quadratic
    ranges = extract_ranges(program, 32)
    res = run_selective_fuzzer(program, {9, 11}, ranges, FuzzBudget.for_consumed(4, iterations=200),
                               rng=random.Random(0), width=32, loop_plan=plan_loop_bounds(program))
    assert {9, 11} <= res.covered
    for case in res.testcases:
        assert case.provenance is Provenance.SELECTIVE
        if len(case.values) > 3:
            assert 1 <= case.values[3] <= 100


def test_selective_fuzzer_with_nothing_left(quadratic):
    program, _tree = quadratic
    res = run_selective_fuzzer(program, set(), [], FuzzBudget(iterations=5))
    assert res.iterations == 0 and not res.exhausted
