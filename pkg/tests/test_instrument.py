from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from hybrid_testgen.frontend import ast as A, parse, pretty_print
from hybrid_testgen.instrument import (
    POWER, GoalKind, compute_depths, error_goals, goal_label, goal_of_label, inject_goals,
)
from conftest import corpus_files, read
from progen import generate

K = GoalKind

# Frozen from the worked example: kind and depth of each goal.
QUADRATIC_GOALS = {
    0: (K.MAIN_START, 1),
    1: (K.FUNCTION_START, 5),
    2: (K.FUNCTION_START, 5),
    3: (K.END_OF_MAIN, 8),
    4: (K.IF_THEN, 2),
    5: (K.ELSE, 2),
    6: (K.LOOP_BODY, 3),
    7: (K.AFTER_LOOP, 7),
    8: (K.IF_THEN, 4),
    9: (K.EMPTY_ELSE, 4),
    10: (K.IF_THEN, 6),
    11: (K.EMPTY_ELSE, 6),
}


def labels_in(program):
    return [s.goal_id for fn in program.functions for s in A.walk_stmts(fn.body.stmts)
            if isinstance(s, A.Label) and s.goal_id is not None]


def test_golden_label_placement(quadratic, quadratic_golden):
    program, _tree = quadratic
    assert program == parse(quadratic_golden)


def test_quadratic_kinds_and_depths(quadratic):
    _program, tree = quadratic
    assert {g.id: (g.kind, g.depth) for g in tree} == QUADRATIC_GOALS


def test_power_table():
    assert POWER[K.IF_THEN] == 5
    assert POWER[K.FUNCTION_START] == POWER[K.FUNCTION_END] == 4
    assert POWER[K.LOOP_BODY] == 3
    assert POWER[K.ELSE] == 2
    for k in (K.EMPTY_ELSE, K.AFTER_LOOP, K.MAIN_START, K.END_OF_MAIN):
        assert POWER[k] == 1


def test_rank_is_depth_times_power(quadratic):
    _program, tree = quadratic
    assert tree.goals[10].rank == 30
    assert tree.goals[3].rank == 8
    assert all(g.rank == g.depth * g.power for g in tree)


def test_tree_parents_follow_the_code(quadratic):
    _program, tree = quadratic
    assert tree.root.id == 0
    assert tree.parent[0] is None
    assert tree.parent[4] == 0 and tree.parent[5] == 0
    assert tree.parent[6] == 4
    assert tree.ancestors(3)[-1] == 0
    assert tree.max_depth() == 8


def test_error_goals(quadratic):
    _program, tree = quadratic
    # Blocks that call reach_error() directly, plus the body of reach_error itself.
    assert error_goals(tree) == {1, 5, 8}


def test_label_names_map_to_ids(quadratic):
    _program, tree = quadratic
    assert goal_label(7) == "GOAL_7"
    assert goal_of_label(tree)["GOAL_11"] == 11


def test_already_instrumented_input_is_rejected(quadratic_golden):
    with pytest.raises(ValueError):
        inject_goals(parse(quadratic_golden))


def test_instrumented_text_round_trips(quadratic):
    program, _tree = quadratic
    assert parse(pretty_print(program)) == program


def test_function_with_lone_return_gets_only_a_start_label():
    prog, tree = inject_goals(parse("int f() { return 1; } int main() { return f(); }"))
    kinds = sorted(g.kind.value for g in tree)
    assert kinds == sorted(["MainStart", "FunctionStart", "EndOfMain"])


def test_uncalled_function_hangs_under_the_root():
    _prog, tree = inject_goals(parse("int f() { int y = 0; return y; } int main() { return 0; }"))
    start = next(g for g in tree if g.kind is K.FUNCTION_START)
    assert tree.parent[start.id] == 0
    assert start.depth == 2


def test_recursion_does_not_loop_forever():
    src = read(next(p for p in corpus_files() if p.endswith("recursion.c")))
    _prog, tree = inject_goals(parse(src))
    for g in tree:
        assert g.id not in tree.ancestors(g.id)


def test_compute_depths_is_idempotent(quadratic):
    _program, tree = quadratic
    again = compute_depths(tree)
    assert {g.id: g.depth for g in again} == {g.id: g.depth for g in tree}


@pytest.mark.parametrize("path", corpus_files() + corpus_files("guarded"))
def test_corpus_labels_are_unique_and_complete(path):
    program, tree = inject_goals(parse(read(path)))
    ids = labels_in(program)
    assert sorted(ids) == list(range(len(tree)))
    assert all(g.depth >= 1 for g in tree)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_programs_get_one_label_per_goal(seed):
    program, tree = inject_goals(parse(generate(seed)))
    ids = labels_in(program)
    assert sorted(ids) == list(range(len(tree)))
    for g in tree:
        if not g.id:
            continue
        p = tree.parent[g.id]
        assert p is not None
        assert 0 in tree.ancestors(g.id)
        # Helper goals are deepened by later call sites, so only main's goals
        # have a depth fixed at the moment a child is attached to them.
        if tree.goals[p].function == "main":
            assert tree.goals[p].depth < g.depth
