"""Range-aware greybox mutation fuzzer and the random selective fuzzer.

Both engines execute the instrumented program directly.  The mutation fuzzer
keeps a local queue of seeds, retains mutants that reach a new goal or a new
goal-to-goal edge, and only ever produces values inside the statically
extracted input ranges.  Suspected-infinite loops run under per-loop
iteration caps taken from a :class:`LoopBoundPlan`, which grows after every
session.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Optional

from .analysis import InputRange, LoopBoundPlan, resolve_ranges
from .frontend import ast as A
from .instrument import GoalsTree
from .interpreter import execute
from .testcase import Provenance, Seed, TestCase
from .tracer import deepest_depth

ENERGY = 64
STALE_LIMIT = 2 * ENERGY
MUTATION_OPS = ("flip", "snap", "arith", "splice", "append", "drop")


@dataclass
class FuzzBudget:
    iterations: Optional[int] = None
    seconds: Optional[float] = None
    min_case_len: int = 0
    max_case_len: Optional[int] = None

    def __post_init__(self):
        if self.iterations is None and self.seconds is None:
            raise ValueError("a fuzzing budget needs iterations or seconds")
        if self.max_case_len is None:
            self.max_case_len = max(4 * self.min_case_len, 4)
        if self.min_case_len > self.max_case_len:
            raise ValueError("min_case_len exceeds max_case_len")

    @classmethod
    def for_consumed(cls, values: int, iterations=None, seconds=None) -> "FuzzBudget":
        return cls(iterations, seconds, values, max(4 * values, 4))


class _Clock:
    def __init__(self, budget: FuzzBudget):
        self.budget = budget
        self.iterations = 0
        self.deadline = time.monotonic() + budget.seconds if budget.seconds is not None else None

    def spent(self) -> bool:
        if self.budget.iterations is not None and self.iterations >= self.budget.iterations:
            return True
        if self.deadline is not None and time.monotonic() > self.deadline:
            return True
        return False


@dataclass
class FuzzResult:
    testcases: list = field(default_factory=list)
    covered: set = field(default_factory=set)
    iterations: int = 0
    errors: list = field(default_factory=list)  # (values, error goal) of error-reaching cases
    exhausted: bool = False  # budget ran out before the goal(s) were covered
    seeds: list = field(default_factory=list)  # retained seeds, in retention order


def _range_at(ranges, i, width):
    if i < len(ranges):
        return ranges[i]
    if ranges:
        return ranges[-1]
    return InputRange.full(i, width)


def mutate(values, ranges, rng: random.Random, min_len: int = 0, max_len: Optional[int] = None,
           others=(), op: Optional[str] = None, width: int = 32) -> tuple:
    """One mutation of ``values``; the result respects ``ranges`` and the length bounds.

    ``ranges`` gives the admissible range of each stream position; positions
    past its end reuse the last entry.
    """
    if max_len is None:
        max_len = max(4 * min_len, len(values), 4)
    vals = list(values)
    if op is None:
        op = rng.choice(MUTATION_OPS)
    if not vals and op not in ("append", "splice"):
        op = "append"
    if op == "drop" and len(vals) <= min_len:
        op = "append" if len(vals) < max_len else "flip"
    if op == "append" and len(vals) >= max_len:
        op = "drop" if len(vals) > min_len else "flip"
    if op == "flip":
        i = rng.randrange(len(vals))
        vals[i] = _range_at(ranges, i, width).sample(rng)
    elif op == "snap":
        i = rng.randrange(len(vals))
        r = _range_at(ranges, i, width)
        vals[i] = rng.choice(r.boundaries() or [r.lo])
    elif op == "arith":
        i = rng.randrange(len(vals))
        delta = rng.randint(1, 35) * rng.choice((-1, 1))
        vals[i] = _range_at(ranges, i, width).clamp(vals[i] + delta)
    elif op == "splice":
        pool = [o for o in others if tuple(o) != tuple(values)]
        if pool:
            other = list(rng.choice(pool))
            cut = rng.randint(0, min(len(vals), len(other)))
            vals = vals[:cut] + other[cut:]
        elif vals:
            i = rng.randrange(len(vals))
            vals[i] = _range_at(ranges, i, width).sample(rng)
        else:
            vals.append(_range_at(ranges, 0, width).sample(rng))
    elif op == "append":
        vals.append(_range_at(ranges, len(vals), width).sample(rng))
    elif op == "drop":
        vals.pop()
    else:
        raise ValueError(f"unknown mutation {op!r}")
    while len(vals) < min_len:
        vals.append(_range_at(ranges, len(vals), width).sample(rng))
    del vals[max_len:]
    return tuple(_range_at(ranges, i, width).clamp(v) for i, v in enumerate(vals))


@dataclass
class _Entry:
    values: tuple
    depth: int
    goals: frozenset
    read_sites: tuple
    order: int
    fuzzed: int = 0
    unique: int = 0


def _pick(queue: list) -> _Entry:
    low = min(e.fuzzed for e in queue)
    return max((e for e in queue if e.fuzzed == low), key=lambda e: (e.depth, e.unique, e.order))


def _refresh_unique(queue: list) -> None:
    counts: dict = {}
    for e in queue:
        for g in e.goals:
            counts[g] = counts.get(g, 0) + 1
    for e in queue:
        e.unique = sum(1 for g in e.goals if counts[g] == 1)


def run_fuzzer(program: A.MiniCProgram, tree: GoalsTree, seeds, budget: FuzzBudget, ranges=(),
               target_goal=None, rng: Optional[random.Random] = None, width: int = 32,
               loop_plan: Optional[LoopBoundPlan] = None, known=()) -> FuzzResult:
    """Mutation fuzzing session.

    ``seeds`` are :class:`Seed` objects or plain value tuples.  A case is
    emitted when it covers a goal outside ``known`` and not yet emitted in
    this session.  The session ends when ``target_goal`` (if any) or every
    goal is covered, or when the budget is spent.
    """
    rng = rng or random.Random(0)
    clock = _Clock(budget)
    caps = loop_plan.caps() if loop_plan is not None else {}
    target = getattr(target_goal, "id", target_goal)
    all_goals = set(tree.goals)
    seen_goals = set(known)
    seen_edges: set = set()
    res = FuzzResult()
    queue: list = []
    error_sites: set = set()

    def run_case(values, provenance):
        clock.iterations += 1
        trace = execute(program, values, width=width, loop_caps=caps)
        goals = set(trace.goals_hit)
        res.covered |= goals
        fresh_goals = goals - seen_goals
        fresh_edges = trace.edges - seen_edges
        seen_goals.update(goals)
        seen_edges.update(trace.edges)
        if fresh_goals:
            res.testcases.append(TestCase(tuple(values), provenance))
        if trace.reached_error and trace.error_goal not in error_sites:
            error_sites.add(trace.error_goal)
            res.errors.append((tuple(values), trace.error_goal))
        return trace, bool(fresh_goals or fresh_edges)

    def done():
        if target is not None and target in res.covered:
            return True
        return all_goals <= seen_goals

    for s in seeds:
        values = tuple(s.values if isinstance(s, Seed) else s)
        if clock.spent() or done():
            break
        trace, _ = run_case(values, s.provenance if isinstance(s, Seed) else Provenance.FUZZER)
        queue.append(_Entry(values, deepest_depth(tree, trace.goals_hit), frozenset(trace.goals_hit),
                            trace.read_sites, len(queue)))
    if not queue:
        trace, _ = run_case((), Provenance.FUZZER)
        queue.append(_Entry((), deepest_depth(tree, trace.goals_hit), frozenset(trace.goals_hit),
                            trace.read_sites, 0))
    _refresh_unique(queue)

    stale = 0
    while not done() and not clock.spent():
        entry = _pick(queue)
        entry.fuzzed += 1
        pos_ranges = resolve_ranges(list(ranges), entry.read_sites,
                                    max(budget.max_case_len, len(entry.values)), width)
        others = [e.values for e in queue]
        for _ in range(ENERGY):
            if done() or clock.spent():
                break
            op = None
            if stale >= STALE_LIMIT:
                op = rng.choice(("append", "drop"))
                stale = 0
            mutant = mutate(entry.values, pos_ranges, rng, budget.min_case_len, budget.max_case_len,
                            others, op, width)
            trace, interesting = run_case(mutant, Provenance.FUZZER)
            if interesting:
                stale = 0
                e = _Entry(mutant, deepest_depth(tree, trace.goals_hit), frozenset(trace.goals_hit),
                           trace.read_sites, len(queue))
                queue.append(e)
                res.seeds.append(Seed(mutant, Provenance.FUZZER, e.depth, 0, smart=True,
                                      goals=e.goals))
                _refresh_unique(queue)
            else:
                stale += 1
    res.iterations = clock.iterations
    res.exhausted = not done()
    if loop_plan is not None:
        loop_plan.grow()
    return res


def run_selective_fuzzer(program: A.MiniCProgram, remaining, ranges, budget: FuzzBudget,
                         rng: Optional[random.Random] = None, width: int = 32,
                         loop_plan: Optional[LoopBoundPlan] = None) -> FuzzResult:
    """Pure random generation from the input ranges until ``remaining`` is covered."""
    rng = rng or random.Random(0)
    remaining = set(remaining)
    res = FuzzResult()
    if not remaining:
        return res
    clock = _Clock(budget)
    caps = loop_plan.caps() if loop_plan is not None else {}
    ranges = list(ranges)
    read_sites: tuple = ()
    length = max(budget.min_case_len, 1)
    error_sites: set = set()
    while remaining and not clock.spent():
        pos_ranges = resolve_ranges(ranges, read_sites, length, width)
        values = tuple(r.sample(rng) for r in pos_ranges)
        clock.iterations += 1
        trace = execute(program, values, width=width, loop_caps=caps)
        read_sites = trace.read_sites
        length = min(max(len(read_sites), budget.min_case_len, 1), budget.max_case_len)
        res.covered |= set(trace.goals_hit)
        hit = remaining.intersection(trace.goals_hit)
        if hit:
            remaining -= hit
            res.testcases.append(TestCase(values, Provenance.SELECTIVE))
        if trace.reached_error and trace.error_goal not in error_sites:
            error_sites.add(trace.error_goal)
            res.errors.append((values, trace.error_goal))
    res.iterations = clock.iterations
    res.exhausted = bool(remaining)
    return res
