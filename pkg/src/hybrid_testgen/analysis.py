"""Static analysis: input ranges, consumed input size, loop bounds, goal ranking."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .frontend import ast as A
from .instrument import GoalsTree


def int_bounds(width: int) -> tuple:
    return -(1 << (width - 1)), (1 << (width - 1)) - 1


def wrap(value: int, width: int) -> int:
    mask = (1 << width) - 1
    value &= mask
    return value - (1 << width) if value >> (width - 1) else value


def bytes_per_value(kind: str, width: int) -> int:
    return 1 if kind == A.BOOL else max(1, (width + 7) // 8)


# -- nondet read sites -------------------------------------------------------


def nondet_sites(program: A.MiniCProgram) -> list:
    """Every nondet read expression, in a fixed source-order traversal.

    A site's index is stable between a program and its instrumented version
    because labels carry no expressions.
    """
    sites = []

    def visit_expr(e):
        if isinstance(e, A.BinOp):
            visit_expr(e.left)
            visit_expr(e.right)
        elif isinstance(e, A.UnOp):
            visit_expr(e.operand)
        elif isinstance(e, A.CallExpr):
            for a in e.args:
                visit_expr(a)
        elif isinstance(e, (A.NondetInt, A.NondetBool)):
            sites.append(e)

    for fn in program.functions:
        for s in A.walk_stmts(fn.body.stmts):
            for e in A.stmt_exprs(s):
                visit_expr(e)
    return sites


# -- input ranges ------------------------------------------------------------


@dataclass(frozen=True)
class InputRange:
    """Candidate values for one nondet read site.

    ``lo``/``hi``/``excluded`` bound what the fuzzers may generate; ``points``
    are boundary values worth trying first (they always lie inside the range).
    """

    input_index: int
    lo: int
    hi: int
    excluded: frozenset = frozenset()
    points: tuple = ()
    kind: str = A.INT

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty range [{self.lo}, {self.hi}]")
        if any(not (self.lo <= v <= self.hi) for v in self.excluded):
            raise ValueError("excluded values must lie inside the range")

    @classmethod
    def full(cls, index: int, width: int, kind: str = A.INT) -> "InputRange":
        if kind == A.BOOL:
            return cls(index, 0, 1, kind=kind)
        lo, hi = int_bounds(width)
        return cls(index, lo, hi, kind=kind)

    def __contains__(self, value: int) -> bool:
        return self.lo <= value <= self.hi and value not in self.excluded

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1 - len(self.excluded)

    def sample(self, rng: random.Random) -> int:
        while True:
            v = rng.randint(self.lo, self.hi)
            if v not in self.excluded:
                return v

    def clamp(self, value: int) -> int:
        """Nearest admissible value to ``value``."""
        v = min(max(value, self.lo), self.hi)
        if v not in self.excluded:
            return v
        for step in range(1, len(self.excluded) + 2):
            for cand in (v - step, v + step):
                if cand in self:
                    return cand
        raise ValueError("range has no admissible value")

    def boundaries(self) -> list:
        """Range ends, neighbours of excluded values and must-try points."""
        cands = [self.lo, self.hi, *self.points]
        for x in sorted(self.excluded):
            cands += [x - 1, x + 1]
        out = []
        for v in cands:
            if v in self and v not in out:
                out.append(v)
        return out

    def to_json(self) -> dict:
        return {
            "input_index": self.input_index,
            "kind": self.kind,
            "lo": self.lo,
            "hi": self.hi,
            "excluded": sorted(self.excluded),
            "points": list(self.points),
        }

    @classmethod
    def from_json(cls, data: dict) -> "InputRange":
        return cls(
            data["input_index"], data["lo"], data["hi"], frozenset(data["excluded"]),
            tuple(data["points"]), data.get("kind", A.INT),
        )


_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}
_NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def _atom(e):
    """``(var, op, literal)`` if ``e`` matches ``x op val`` or ``val op x``."""
    if isinstance(e, A.BinOp) and e.op in A.CMP_OPS:
        if isinstance(e.left, A.Var) and isinstance(e.right, A.IntLit):
            return e.left.name, e.op, e.right.value
        if isinstance(e.left, A.IntLit) and isinstance(e.right, A.Var):
            return e.right.name, _FLIP[e.op], e.left.value
    return None


def _must_hold(e, polarity: bool) -> list:
    """Atomic facts implied by ``e`` evaluating to ``polarity``."""
    if isinstance(e, A.UnOp) and e.op == "!":
        return _must_hold(e.operand, not polarity)
    if isinstance(e, A.BinOp) and e.op == "&&" and polarity:
        return _must_hold(e.left, True) + _must_hold(e.right, True)
    if isinstance(e, A.BinOp) and e.op == "||" and not polarity:
        return _must_hold(e.left, False) + _must_hold(e.right, False)
    atom = _atom(e)
    if atom is None:
        return []
    name, op, val = atom
    return [(name, op if polarity else _NEGATE[op], val)]


def _all_atoms(e) -> list:
    out = []
    for node in A.walk_expr(e):
        atom = _atom(node)
        if atom is not None:
            out.append(atom)
    return out


def _leads_to_error(block) -> bool:
    if block is None:
        return False
    return any(isinstance(s, A.AssertFail) for s in block.stmts)


def _input_vars(fn: A.FunctionDecl, site_index: dict) -> dict:
    """Variables of ``fn`` written exactly once, directly from a nondet read."""
    writes = {}
    source = {}
    for p in fn.params:
        writes[p.name] = writes.get(p.name, 0) + 2
    for s in A.walk_stmts(fn.body.stmts):
        if isinstance(s, A.Decl):
            writes[s.name] = writes.get(s.name, 0) + 1
            if isinstance(s.init, (A.NondetInt, A.NondetBool)):
                source[s.name] = site_index[id(s.init)]
        elif isinstance(s, A.Assign):
            writes[s.name] = writes.get(s.name, 0) + 1
            if isinstance(s.value, (A.NondetInt, A.NondetBool)):
                source[s.name] = site_index[id(s.value)]
    return {name: site for name, site in source.items() if writes[name] == 1}


def extract_ranges(program: A.MiniCProgram, width: int = 32) -> list:
    """One :class:`InputRange` per nondet read site.

    Comparisons ``x op literal`` on a variable read straight from input narrow
    that input's range when one arm of the branch is ``reach_error()`` (the
    error-avoiding polarity is kept); every other matching comparison only
    contributes boundary points to try.
    """
    sites = nondet_sites(program)
    site_index = {id(e): i for i, e in enumerate(sites)}
    vmin, vmax = int_bounds(width)
    bounds = {}
    for i, e in enumerate(sites):
        if isinstance(e, A.NondetBool):
            bounds[i] = [0, 1, set(), [], A.BOOL]
        else:
            bounds[i] = [vmin, vmax, set(), [], A.INT]

    for fn in program.functions:
        inputs = _input_vars(fn, site_index)
        if not inputs:
            continue
        for s in A.walk_stmts(fn.body.stmts):
            if not isinstance(s, (A.If, A.While)):
                continue
            for name, op, val in _all_atoms(s.cond):
                if name in inputs:
                    val = wrap(val, width)
                    bounds[inputs[name]][3].extend([val - 1, val, val + 1])
            if not isinstance(s, A.If):
                continue
            if _leads_to_error(s.then):
                facts = _must_hold(s.cond, False)
            elif _leads_to_error(s.orelse):
                facts = _must_hold(s.cond, True)
            else:
                continue
            for name, op, val in facts:
                if name not in inputs:
                    continue
                b = bounds[inputs[name]]
                if b[4] == A.BOOL:
                    continue
                val = wrap(val, width)
                if op == ">":
                    b[0] = max(b[0], val + 1)
                elif op == ">=":
                    b[0] = max(b[0], val)
                elif op == "<":
                    b[1] = min(b[1], val - 1)
                elif op == "<=":
                    b[1] = min(b[1], val)
                elif op == "==":
                    b[0], b[1] = max(b[0], val), min(b[1], val)
                else:
                    b[2].add(val)

    ranges = []
    for i in range(len(sites)):
        lo, hi, excluded, points, kind = bounds[i]
        if kind == A.BOOL:
            ranges.append(InputRange(i, 0, 1, kind=kind))
            continue
        excluded = {v for v in excluded if lo <= v <= hi}
        if lo > hi or len(excluded) >= hi - lo + 1:
            # Contradictory facts: keep the full domain rather than an empty range.
            lo, hi, excluded = vmin, vmax, set()
        pts = []
        for v in points:
            if lo <= v <= hi and v not in excluded and v not in pts:
                pts.append(v)
        ranges.append(InputRange(i, lo, hi, frozenset(excluded), tuple(pts), kind))
    return ranges


def resolve_ranges(ranges: list, read_sites, length: int, width: int = 32) -> list:
    """Per-stream-position ranges for a case whose reads came from ``read_sites``.

    Positions past the known reads reuse the last site's range, or the full
    domain when nothing is known.
    """
    out = []
    by_site = {r.input_index: r for r in ranges}
    for pos in range(length):
        if pos < len(read_sites):
            site = read_sites[pos]
        elif read_sites:
            site = read_sites[-1]
        else:
            site = None
        r = by_site.get(site)
        out.append(r if r is not None else InputRange.full(pos, width))
    return out


# -- consumed input size -----------------------------------------------------


@dataclass(frozen=True)
class ConsumedInputSize:
    bytes: int = 0
    values: int = 0

    def merge(self, other: "ConsumedInputSize") -> "ConsumedInputSize":
        """Keep the largest size observed so far."""
        if other.bytes > self.bytes or (other.bytes == self.bytes and other.values > self.values):
            return other
        return self


def consumed_input_size(trace, width: int = 32) -> ConsumedInputSize:
    total = sum(bytes_per_value(k, width) for k in trace.read_types)
    return ConsumedInputSize(total, len(trace.read_types))


# -- loop bounds -------------------------------------------------------------


@dataclass
class LoopBound:
    suspected_infinite: bool
    current_bound: int = 2


@dataclass
class LoopBoundPlan:
    loops: dict = field(default_factory=dict)
    cap: int = 64

    def caps(self) -> dict:
        """Per-loop iteration caps for the interpreter (suspected loops only)."""
        return {lid: b.current_bound for lid, b in self.loops.items() if b.suspected_infinite}

    def grow(self) -> None:
        for b in self.loops.values():
            if b.suspected_infinite:
                b.current_bound = min(self.cap, b.current_bound * 2)


def loops_in_order(program: A.MiniCProgram) -> list:
    return [s for fn in program.functions for s in A.walk_stmts(fn.body.stmts) if isinstance(s, A.While)]


def _is_const_true(e) -> bool:
    if isinstance(e, A.IntLit):
        return e.value != 0
    if isinstance(e, A.BoolLit):
        return e.value
    return False


def plan_loop_bounds(program: A.MiniCProgram, initial: int = 2, cap: int = 64) -> LoopBoundPlan:
    plan = LoopBoundPlan(cap=cap)
    for lid, loop in enumerate(loops_in_order(program)):
        if _is_const_true(loop.cond):
            suspected = True
        else:
            nodes = list(A.walk_expr(loop.cond))
            names = {n.name for n in nodes if isinstance(n, A.Var)}
            volatile = any(isinstance(n, (A.NondetInt, A.NondetBool, A.CallExpr)) for n in nodes)
            assigned = {s.name for s in A.walk_stmts(loop.body.stmts) if isinstance(s, A.Assign)}
            suspected = bool(names) and not volatile and not (names & assigned)
        plan.loops[lid] = LoopBound(suspected, max(1, initial))
    return plan


# -- ranking -----------------------------------------------------------------


class Strategy(str, enum.Enum):
    DEPTH_FIRST = "depth"
    RANK_SCORE = "rank"


def rank_goals(tree: GoalsTree, strategy=Strategy.DEPTH_FIRST) -> list:
    strategy = Strategy(strategy)
    goals = list(tree.goals.values())
    if strategy is Strategy.DEPTH_FIRST:
        return sorted(goals, key=lambda g: (-g.depth, g.id))
    return sorted(goals, key=lambda g: (-g.rank, -g.power, g.id))
