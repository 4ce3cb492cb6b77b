"""Goal-label injection and the goals tree.

Labels ``GOAL_<id>:;`` are placed at the start of every then/else block (an
empty else is synthesised when missing), at the start of every loop body and
right after the loop, and at the start and end of every function body.

The goals tree is the syntactic succession of labels: a goal's children are
the labels that can be met next when walking the code forwards, with calls
walked through the callee's body and ``return``/``reach_error()`` ending a
path.  Loop back edges are ignored and no reachability pruning is done, so a
label after ``while(1)`` still hangs off the end of the loop body.  A goal that
appears on several routes gets the largest depth among them.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Optional

from .frontend import ast as A


class GoalKind(str, enum.Enum):
    IF_THEN = "IfThen"
    ELSE = "Else"
    EMPTY_ELSE = "EmptyElse"
    LOOP_BODY = "LoopBody"
    AFTER_LOOP = "AfterLoop"
    FUNCTION_START = "FunctionStart"
    FUNCTION_END = "FunctionEnd"
    MAIN_START = "MainStart"
    END_OF_MAIN = "EndOfMain"


POWER = {
    GoalKind.IF_THEN: 5,
    GoalKind.FUNCTION_START: 4,
    GoalKind.FUNCTION_END: 4,
    GoalKind.LOOP_BODY: 3,
    GoalKind.ELSE: 2,
    GoalKind.EMPTY_ELSE: 1,
    GoalKind.AFTER_LOOP: 1,
    GoalKind.MAIN_START: 1,
    GoalKind.END_OF_MAIN: 1,
}


def goal_label(goal_id: int) -> str:
    return f"GOAL_{goal_id}"


@dataclass(frozen=True)
class Goal:
    id: int
    kind: GoalKind
    function: str
    loc: tuple = (0, 0)
    depth: int = 0

    @property
    def power(self) -> int:
        return POWER[self.kind]

    @property
    def rank(self) -> int:
        return self.depth * self.power

    @property
    def label(self) -> str:
        return goal_label(self.id)


@dataclass
class GoalsTree:
    goals: dict
    program: A.MiniCProgram  # the instrumented program the goals live in
    parent: dict = field(default_factory=dict)
    edges: set = field(default_factory=set)

    @property
    def root(self) -> Goal:
        return self.goals[0]

    def __iter__(self):
        return iter(self.goals[i] for i in sorted(self.goals))

    def __len__(self):
        return len(self.goals)

    def children(self, goal_id: int) -> list:
        return sorted(g for g, p in self.parent.items() if p == goal_id)

    def ancestors(self, goal_id: int) -> list:
        out = []
        cur = self.parent.get(goal_id)
        while cur is not None and cur not in out and cur != goal_id:
            out.append(cur)
            cur = self.parent.get(cur)
        return out

    def max_depth(self) -> int:
        return max((g.depth for g in self.goals.values()), default=0)

    def to_json(self) -> list:
        return [
            {
                "id": g.id,
                "label": g.label,
                "kind": g.kind.value,
                "function": g.function,
                "depth": g.depth,
                "power": g.power,
                "rank": g.rank,
                "parent": self.parent.get(g.id),
                "line": g.loc[0],
                "column": g.loc[1],
            }
            for g in self
        ]


# -- injection ---------------------------------------------------------------


class _Injector:
    def __init__(self):
        self.goals = {}
        self.next_id = 0

    def new_goal(self, kind: GoalKind, function: str, loc) -> int:
        gid = self.next_id
        self.next_id += 1
        self.goals[gid] = Goal(gid, kind, function, tuple(loc))
        return gid

    # Ids are allocated before blocks are rebuilt so that numbering follows the
    # source-order traversal: a statement's own goals first, then its children.
    def number_branches(self, stmts, fn_name) -> dict:
        ids = {}
        for s in stmts:
            if isinstance(s, A.If):
                then_id = self.new_goal(GoalKind.IF_THEN, fn_name, s.then.loc)
                kind = GoalKind.ELSE if s.orelse is not None else GoalKind.EMPTY_ELSE
                else_loc = s.orelse.loc if s.orelse is not None else s.loc
                else_id = self.new_goal(kind, fn_name, else_loc)
                ids[id(s)] = (then_id, else_id)
                ids.update(self.number_branches(s.then.stmts, fn_name))
                if s.orelse is not None:
                    ids.update(self.number_branches(s.orelse.stmts, fn_name))
            elif isinstance(s, A.While):
                body_id = self.new_goal(GoalKind.LOOP_BODY, fn_name, s.body.loc)
                after_id = self.new_goal(GoalKind.AFTER_LOOP, fn_name, s.loc)
                ids[id(s)] = (body_id, after_id)
                ids.update(self.number_branches(s.body.stmts, fn_name))
            elif isinstance(s, A.Block):
                ids.update(self.number_branches(s.stmts, fn_name))
        return ids

    def rebuild(self, stmts, ids) -> list:
        out = []
        for s in stmts:
            if isinstance(s, A.If):
                then_id, else_id = ids[id(s)]
                then = A.Block([A.Label(goal_label(then_id))] + self.rebuild(s.then.stmts, ids), s.then.loc)
                old_else = s.orelse.stmts if s.orelse is not None else []
                else_loc = s.orelse.loc if s.orelse is not None else s.loc
                orelse = A.Block([A.Label(goal_label(else_id))] + self.rebuild(old_else, ids), else_loc)
                out.append(A.If(s.cond, then, orelse, s.loc))
            elif isinstance(s, A.While):
                body_id, after_id = ids[id(s)]
                body = A.Block([A.Label(goal_label(body_id))] + self.rebuild(s.body.stmts, ids), s.body.loc)
                out.append(A.While(s.cond, body, s.loc))
                out.append(A.Label(goal_label(after_id)))
            elif isinstance(s, A.Block):
                out.append(A.Block(self.rebuild(s.stmts, ids), s.loc))
            else:
                out.append(s)
        return out


def _end_label_position(stmts) -> int:
    """Index where the end-of-function label goes: before a trailing return."""
    if stmts and isinstance(stmts[-1], A.Return):
        return len(stmts) - 1
    return len(stmts)


def inject_goals(program: A.MiniCProgram) -> tuple:
    """Return ``(instrumented_program, goals_tree)`` with depths computed.

    Non-main functions whose end position coincides with their start (an
    empty body or a lone ``return``) receive a single start label.
    """
    for fn in program.functions:
        for s in A.walk_stmts(fn.body.stmts):
            if isinstance(s, A.Label) and s.goal_id is not None:
                raise ValueError(f"program already contains goal label {s.name}")

    inj = _Injector()
    main = program.main
    main_start = inj.new_goal(GoalKind.MAIN_START, main.name, main.body.loc)
    plan = {}
    for fn in program.functions:
        if fn is main:
            continue
        start = inj.new_goal(GoalKind.FUNCTION_START, fn.name, fn.body.loc)
        end = None
        if _end_label_position(fn.body.stmts) > 0:
            end = inj.new_goal(GoalKind.FUNCTION_END, fn.name, fn.body.loc)
        plan[fn.name] = (start, end, inj.number_branches(fn.body.stmts, fn.name))
    main_end = inj.new_goal(GoalKind.END_OF_MAIN, main.name, main.body.loc)
    plan[main.name] = (main_start, main_end, inj.number_branches(main.body.stmts, main.name))

    functions = []
    for fn in program.functions:
        start, end, ids = plan[fn.name]
        stmts = inj.rebuild(fn.body.stmts, ids)
        if end is not None:
            pos = _end_label_position(stmts)
            stmts.insert(pos, A.Label(goal_label(end)))
        stmts.insert(0, A.Label(goal_label(start)))
        functions.append(A.FunctionDecl(fn.ret_type, fn.name, list(fn.params), A.Block(stmts, fn.body.loc), fn.loc))

    instrumented = A.MiniCProgram(functions, program.entry)
    tree = GoalsTree(dict(inj.goals), instrumented)
    return instrumented, compute_depths(tree)


# -- depths ------------------------------------------------------------------


@dataclass(frozen=True)
class _At:
    """Walk position: depth and id of the last goal met, and path liveness."""

    depth: int
    goal: Optional[int]
    alive: bool = True

    def killed(self) -> "_At":
        return dataclasses.replace(self, alive=False)


def _merge(states) -> Optional[_At]:
    states = [s for s in states if s is not None]
    if not states:
        return None
    live = [s for s in states if s.alive] or states
    return max(live, key=lambda s: (s.depth, -(s.goal if s.goal is not None else -1)))


class _DepthWalker:
    def __init__(self, tree: GoalsTree):
        self.program = tree.program
        self.label_goal = {g.label: g.id for g in tree.goals.values()}
        self.depth = {}
        self.parent = {}
        self.edges = set()

    def visit_label(self, gid: int, at: _At) -> _At:
        d = at.depth + 1
        if at.goal is not None:
            self.edges.add((at.goal, gid))
        if d > self.depth.get(gid, 0):
            self.depth[gid] = d
            # a second call of the same function must not hang a goal below itself
            if not self._descends_from(at.goal, gid):
                self.parent[gid] = at.goal
        return _At(d, gid, at.alive)

    def _descends_from(self, goal, ancestor) -> bool:
        seen = set()
        while goal is not None and goal not in seen:
            if goal == ancestor:
                return True
            seen.add(goal)
            goal = self.parent.get(goal)
        return False

    def walk_function(self, fn: A.FunctionDecl, at: _At, stack: tuple) -> _At:
        returns = []
        end = self.walk_stmts(fn.body.stmts, at, stack + (fn.name,), returns)
        exit_at = _merge(returns + [end])
        return exit_at

    def walk_expr(self, e, at: _At, stack) -> _At:
        for node in _calls_in_eval_order(e):
            callee = self.program.function(node.name)
            if callee is not None and node.name not in stack:
                out = self.walk_function(callee, at, stack)
                at = _At(out.depth, out.goal, at.alive and out.alive)
        return at

    def walk_stmts(self, stmts, at: _At, stack, returns) -> _At:
        for s in stmts:
            if isinstance(s, A.Label):
                gid = self.label_goal.get(s.name)
                if gid is not None:
                    at = self.visit_label(gid, at)
            elif isinstance(s, (A.Decl, A.Assign, A.Call)):
                for e in A.stmt_exprs(s):
                    at = self.walk_expr(e, at, stack)
            elif isinstance(s, A.Return):
                if s.value is not None:
                    at = self.walk_expr(s.value, at, stack)
                returns.append(at)
                at = at.killed()
            elif isinstance(s, A.AssertFail):
                callee = self.program.function(A.REACH_ERROR)
                if callee is not None and A.REACH_ERROR not in stack:
                    at = self.walk_function(callee, at, stack)
                at = at.killed()
            elif isinstance(s, A.Block):
                at = self.walk_stmts(s.stmts, at, stack, returns)
            elif isinstance(s, A.If):
                at = self.walk_expr(s.cond, at, stack)
                then_at = self.walk_stmts(s.then.stmts, at, stack, returns)
                else_at = at
                if s.orelse is not None:
                    else_at = self.walk_stmts(s.orelse.stmts, at, stack, returns)
                at = _merge([then_at, else_at])
            elif isinstance(s, A.While):
                at = self.walk_expr(s.cond, at, stack)
                body_at = self.walk_stmts(s.body.stmts, at, stack, returns)
                at = _merge([at, body_at])
        return at


def _calls_in_eval_order(e):
    """User calls inside ``e``, arguments before the call that consumes them."""
    if isinstance(e, A.BinOp):
        yield from _calls_in_eval_order(e.left)
        yield from _calls_in_eval_order(e.right)
    elif isinstance(e, A.UnOp):
        yield from _calls_in_eval_order(e.operand)
    elif isinstance(e, A.CallExpr):
        for a in e.args:
            yield from _calls_in_eval_order(a)
        yield e


def compute_depths(tree: GoalsTree) -> GoalsTree:
    """Assign every goal its largest depth in the goals tree (root depth 1)."""
    walker = _DepthWalker(tree)
    program = tree.program
    main = program.main
    walker.walk_function(main, _At(0, None), ())
    root_at = _At(walker.depth.get(0, 1), 0)
    for fn in program.functions:
        first = fn.body.stmts[0] if fn.body.stmts else None
        start = walker.label_goal.get(first.name) if isinstance(first, A.Label) else None
        if fn is not main and start is not None and start not in walker.depth:
            # Never called from main: hang the function under the root.
            walker.walk_function(fn, root_at, ())
    goals = {gid: dataclasses.replace(g, depth=walker.depth.get(gid, 1)) for gid, g in tree.goals.items()}
    parent = {gid: walker.parent.get(gid) for gid in goals}
    return GoalsTree(goals, program, parent, walker.edges)


def goal_of_label(tree: GoalsTree) -> dict:
    return {g.label: g.id for g in tree.goals.values()}


def error_goals(tree: GoalsTree) -> set:
    """Goals whose block leads straight into ``reach_error()``.

    These are the labels at the head of a block that calls ``reach_error()``
    before any further label, plus every goal inside ``reach_error`` itself.
    """
    out = set()
    labels = goal_of_label(tree)

    def scan(stmts):
        current = None
        for s in stmts:
            if isinstance(s, A.Label) and s.name in labels:
                current = labels[s.name]
            elif isinstance(s, A.AssertFail) and current is not None:
                out.add(current)
            elif isinstance(s, A.If):
                scan(s.then.stmts)
                if s.orelse is not None:
                    scan(s.orelse.stmts)
                current = None
            elif isinstance(s, A.While):
                scan(s.body.stmts)
                current = None
            elif isinstance(s, A.Block):
                scan(s.stmts)

    for fn in tree.program.functions:
        if fn.name == A.REACH_ERROR:
            out.update(g.id for g in tree.goals.values() if g.function == A.REACH_ERROR)
        else:
            scan(fn.body.stmts)
    return out
