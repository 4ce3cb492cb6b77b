"""Replay of test cases, coverage bookkeeping and seed promotion.

The tracer is the only component that marks goals as covered: every engine
hands its output here, the case is executed on the instrumented program, and
whatever labels it hits leave the goal queue.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .analysis import ConsumedInputSize, InputRange, consumed_input_size, int_bounds
from .bmc import Witness
from .frontend import ast as A
from .instrument import GoalsTree
from .interpreter import DEFAULT_STEP_LIMIT, ExecutionTrace, execute
from .testcase import Provenance, Seed, SeedStore, TestCase

__all__ = [
    "CoverageRecord", "Tracer", "complete_testcase", "execute", "promote_seeds", "deepest_depth",
]


@dataclass
class CoverageRecord:
    covered: set = field(default_factory=set)
    first_case: dict = field(default_factory=dict)  # goal id -> first covering case id

    def add(self, goals, case_id: str) -> list:
        new = []
        for g in goals:
            if g not in self.covered:
                self.covered.add(g)
                self.first_case[g] = case_id
                new.append(g)
        return new


def deepest_depth(tree: GoalsTree, goals) -> int:
    return max((tree.goals[g].depth for g in goals if g in tree.goals), default=0)


def complete_testcase(witness: Witness, ranges, rng: random.Random, width: int = 32) -> tuple:
    """Fill the open positions of a partial witness with random in-range values.

    Each open value is drawn uniformly from its narrowed interval intersected
    with the static range of its read site; an empty intersection falls back
    to the interval alone and a missing interval to the full domain.
    """
    by_site = {r.input_index: r for r in ranges}
    vmin, vmax = int_bounds(width)
    out = []
    for i in range(witness.length):
        if i in witness.assignment:
            out.append(witness.assignment[i])
            continue
        kind = witness.kinds[i] if i < len(witness.kinds) else A.INT
        lo, hi = witness.intervals.get(i, (0, 1) if kind == A.BOOL else (vmin, vmax))
        site = witness.sites[i] if i < len(witness.sites) else None
        r = by_site.get(site)
        if r is not None and max(lo, r.lo) <= min(hi, r.hi):
            cand = InputRange(i, max(lo, r.lo), min(hi, r.hi),
                              frozenset(v for v in r.excluded if max(lo, r.lo) <= v <= min(hi, r.hi)))
            if cand.size > 0:
                out.append(cand.sample(rng))
                continue
        out.append(rng.randint(lo, hi))
    return tuple(out)


def promote_seeds(traces, store: SeedStore, tree: GoalsTree, covered: Optional[set] = None,
                  max_depth: int = 0) -> list:
    """Promote cases that reach new goals or the deepest depth seen so far.

    ``traces`` is a list of ``(TestCase, ExecutionTrace)``.  ``covered`` and
    ``max_depth`` describe what was known before these traces and are updated
    in place (``covered``) as the traces are scanned in order.  Returns the
    promoted seeds; every seed's unique-goal count is refreshed.
    """
    covered = covered if covered is not None else set()
    promoted = []
    for case, trace in traces:
        goals = set(trace.goals_hit)
        depth = deepest_depth(tree, goals)
        max_depth = max(max_depth, depth)
        new = goals - covered
        covered |= goals
        if new or (depth and depth >= max_depth):
            seed = Seed(case.values, case.provenance, depth, 0,
                        smart=case.provenance is not Provenance.PRIMARY, goals=frozenset(goals))
            if store.add(seed):
                promoted.append(seed)
    refresh_unique(store)
    return promoted


def refresh_unique(store: SeedStore) -> None:
    counts: dict = {}
    for s in store:
        for g in s.goals:
            counts[g] = counts.get(g, 0) + 1
    for s in store:
        s.unique_goals = sum(1 for g in s.goals if counts[g] == 1)


class Tracer:
    """Single-writer owner of coverage, the goal queue, test cases and seeds."""

    def __init__(self, program: A.MiniCProgram, tree: GoalsTree, ranges=(), goal_queue=None,
                 rng: Optional[random.Random] = None, width: int = 32,
                 step_limit: int = DEFAULT_STEP_LIMIT):
        self.program = program
        self.tree = tree
        self.ranges = list(ranges)
        self.queue = list(goal_queue) if goal_queue is not None else [g.id for g in tree]
        self.rng = rng or random.Random(0)
        self.width = width
        self.step_limit = step_limit
        self.coverage = CoverageRecord()
        self.testcases: list = []
        self.seeds = SeedStore()
        self.consumed = ConsumedInputSize()
        self.max_depth = 0
        self._counter = 0
        self.case_goals: dict = {}  # case id -> goals hit on replay

    @property
    def covered(self) -> set:
        return self.coverage.covered

    def _next_id(self, provenance: Provenance) -> str:
        self._counter += 1
        return f"{self._counter:05d}-{provenance.value}"

    def to_testcase(self, output, provenance: Provenance) -> TestCase:
        if isinstance(output, Witness):
            if output.complete:
                values = output.values()
            else:
                values = complete_testcase(output, self.ranges, self.rng, self.width)
                provenance = Provenance.TRACER_COMPLETED
        elif isinstance(output, TestCase):
            values, provenance = output.values, output.provenance
        else:
            values = tuple(output)
        return TestCase(tuple(values), provenance, self._next_id(provenance))

    def run(self, output, provenance: Provenance = Provenance.FUZZER) -> tuple:
        """Process one engine output; returns ``(case, trace, newly_covered)``."""
        case = self.to_testcase(output, provenance)
        trace = execute(self.program, case.values, step_limit=self.step_limit, width=self.width)
        self.testcases.append(case)
        self.case_goals[case.id] = trace.goals_hit
        new = self.coverage.add(trace.goals_hit, case.id)
        if new:
            hit = set(new)
            self.queue = [g for g in self.queue if g not in hit]
        self.consumed = self.consumed.merge(consumed_input_size(trace, self.width))
        before = self.covered - set(new)
        promote_seeds([(case, trace)], self.seeds, self.tree, before, self.max_depth)
        self.max_depth = max(self.max_depth, deepest_depth(self.tree, trace.goals_hit))
        return case, trace, new

    def run_all(self, outputs, provenance: Provenance = Provenance.FUZZER) -> list:
        return [self.run(o, provenance) for o in outputs]


def run_tracer(program, output, tracer: Tracer, provenance: Provenance = Provenance.FUZZER):
    """Functional entry point mirroring the tracer algorithm: returns (T, G, S)."""
    tracer.run(output, provenance)
    return tracer.testcases, tracer.queue, tracer.seeds
