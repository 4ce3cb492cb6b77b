"""Bounded model checking of goal reachability.

``run_bmc`` symbolically executes the instrumented program towards one goal
label.  It returns a complete witness when a path condition reaching the
label is satisfiable, reports failure when every path within the unwinding
bound has been refuted, and hands back a partial witness (the narrowed input
intervals of the most promising path) when it runs out of budget.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Optional

from ..frontend import ast as A
from ..instrument import Goal, GoalsTree
from ..interpreter import execute
from .solver import SolveResult, Solver, Status, solve
from .symex import Found, OutOfBudget, SymbolicExecutor
from .terms import TermBuilder

__all__ = [
    "BmcConfig", "BmcResult", "BmcStatus", "BugReport", "SolveResult", "Solver", "Status",
    "TermBuilder", "Witness", "generate_bug_report", "run_bmc", "solve",
]


class BmcStatus(str, enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    TIMEOUT = "timeout"


@dataclass
class BmcConfig:
    k: int = 8
    light_mode: bool = False
    seconds: Optional[float] = None
    node_budget: int = 200_000
    solver_nodes: int = 20_000
    check_errors: bool = False  # report reachable reach_error() calls as failures

    @classmethod
    def light(cls, **kw) -> "BmcConfig":
        kw.setdefault("k", 2)
        kw.setdefault("node_budget", 20_000)
        kw.setdefault("solver_nodes", 5_000)
        return cls(light_mode=True, **kw)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("unwind bound must be positive")
        if self.light_mode:
            self.check_errors = False


@dataclass
class Witness:
    """Input assignment by stream position; ``intervals`` holds what is still open."""

    assignment: dict
    target_goal: Optional[int]
    complete: bool = True
    intervals: dict = field(default_factory=dict)
    sites: tuple = ()
    kinds: tuple = ()
    is_error: bool = False

    @property
    def length(self) -> int:
        return len(self.sites) if self.sites else len(self.assignment)

    def values(self) -> tuple:
        """Values in read order; only meaningful for complete witnesses."""
        return tuple(self.assignment.get(i, 0) for i in range(self.length))

    def to_json(self) -> dict:
        return {
            "target_goal": self.target_goal,
            "complete": self.complete,
            "is_error": self.is_error,
            "assignment": {str(k): v for k, v in sorted(self.assignment.items())},
            "intervals": {str(k): list(v) for k, v in sorted(self.intervals.items())},
            "sites": list(self.sites),
            "kinds": list(self.kinds),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Witness":
        return cls(
            {int(k): v for k, v in data["assignment"].items()},
            data["target_goal"],
            data["complete"],
            {int(k): tuple(v) for k, v in data["intervals"].items()},
            tuple(data["sites"]),
            tuple(data["kinds"]),
            data.get("is_error", False),
        )


@dataclass
class BmcResult:
    status: BmcStatus
    witness: Optional[Witness] = None
    nodes: int = 0
    paths_cut: int = 0

    @property
    def res(self) -> BmcStatus:
        return self.status


def _partial(best, target) -> Optional[Witness]:
    if best is None:
        return None
    _score, box, sites, kinds = best
    assignment, intervals = {}, {}
    for i in range(len(sites)):
        lo, hi = box.get(i, (None, None))
        if lo is None:
            continue
        if lo == hi:
            assignment[i] = lo
        else:
            intervals[i] = (lo, hi)
    return Witness(assignment, target, False, intervals, sites, kinds)


def run_bmc(program: A.MiniCProgram, goal, cfg: Optional[BmcConfig] = None,
            tree: Optional[GoalsTree] = None, width: int = 32) -> BmcResult:
    """Try to reach ``goal`` (a :class:`Goal` or id) in the instrumented ``program``."""
    cfg = cfg or BmcConfig()
    gid = goal.id if isinstance(goal, Goal) else goal
    ancestors = tree.ancestors(gid) if tree is not None else ()
    deadline = time.monotonic() + cfg.seconds if cfg.seconds is not None else None
    ex = SymbolicExecutor(
        program, width=width, k=cfg.k, target=gid, check_errors=cfg.check_errors,
        node_budget=cfg.node_budget, deadline=deadline, solver_nodes=cfg.solver_nodes,
        ancestors=ancestors,
    )
    try:
        ex.run()
    except Found as f:
        st = f.state
        w = Witness(dict(f.model), gid, True, {}, st.sites, st.kinds, f.is_error)
        status = BmcStatus.FAILURE if f.is_error else BmcStatus.SUCCESS
        return BmcResult(status, w, ex.nodes, ex.paths_cut)
    except OutOfBudget:
        return BmcResult(BmcStatus.TIMEOUT, _partial(ex.best, gid), ex.nodes, ex.paths_cut)
    if ex.gave_up:
        return BmcResult(BmcStatus.TIMEOUT, _partial(ex.best, gid), ex.nodes, ex.paths_cut)
    return BmcResult(BmcStatus.FAILURE, None, ex.nodes, ex.paths_cut)


@dataclass
class BugReport:
    goal_id: Optional[int]
    kind: str
    inputs: tuple
    goals_hit: tuple
    outcome: str
    source: str = "bmc"

    @property
    def key(self):
        return (self.kind, self.goal_id)

    def to_json(self) -> dict:
        return {
            "goal": self.goal_id,
            "kind": self.kind,
            "inputs": list(self.inputs),
            "goals_hit": list(self.goals_hit),
            "outcome": self.outcome,
            "source": self.source,
        }


def generate_bug_report(program: A.MiniCProgram, output, width: int = 32,
                        source: str = "bmc") -> BugReport:
    """Replay an error-reaching witness (or plain value sequence) into a report."""
    values = output.values() if isinstance(output, Witness) else tuple(output)
    trace = execute(program, values, width=width)
    if trace.reached_error:
        kind = "ReachError"
    elif trace.outcome.kind.value == "RuntimeFault":
        kind = "RuntimeFault"
    else:
        kind = "NotReproduced"
    goal = trace.error_goal
    if goal is None and kind == "RuntimeFault" and trace.goals_hit:
        goal = trace.goals_hit[-1]
    if goal is None and isinstance(output, Witness):
        goal = output.target_goal
    return BugReport(goal, kind, tuple(values), trace.goals_hit, str(trace.outcome), source)
