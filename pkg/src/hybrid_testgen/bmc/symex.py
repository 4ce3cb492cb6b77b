"""Depth-first bounded symbolic execution of instrumented MiniC programs.

Every nondet read becomes a fresh symbol numbered by its position in the
input stream.  Branches fork the state; a fork is kept only when interval
propagation cannot refute its path condition.  Loops are unwound at most
``k`` times and calls are inlined, with recursion cut at ``k`` nested
activations of the same function.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..analysis import nondet_sites
from ..frontend import ast as A
from .solver import Solver, Status
from .terms import ZERO, TermBuilder


class Found(Exception):
    """A satisfiable path reached the target (or an error location)."""

    def __init__(self, model: dict, state: "State", is_error: bool = False):
        self.model = model
        self.state = state
        self.is_error = is_error


class OutOfBudget(Exception):
    pass


@dataclass
class State:
    frames: list  # one dict per activation: resolved variable key -> term
    pc: tuple = ()
    box: dict = field(default_factory=dict)
    sites: tuple = ()  # nondet site of each symbol
    kinds: tuple = ()
    goals: tuple = ()  # goals met along the path, first-hit order
    calls: tuple = ()  # active function names
    cont: tuple = (False,)  # per open statement: can the code after it still reach the target?

    def copy(self) -> "State":
        return State([dict(f) for f in self.frames], self.pc, dict(self.box),
                     self.sites, self.kinds, self.goals, self.calls, self.cont)

    @property
    def reads(self) -> int:
        return len(self.sites)

    @property
    def env(self) -> dict:
        return self.frames[-1]


def _resolve_names(fn: A.FunctionDecl, out: dict, bools: set) -> None:
    """Give every declaration a unique key so shadowing needs no bookkeeping."""
    counter = [0]

    def fresh(name):
        counter[0] += 1
        return f"{fn.name}:{name}#{counter[0]}"

    scopes = [{p.name: fresh(p.name) for p in fn.params}]
    out[("params", id(fn))] = [scopes[0][p.name] for p in fn.params]
    bools.update(scopes[0][p.name] for p in fn.params if p.type == A.BOOL)

    def lookup(name):
        for sc in reversed(scopes):
            if name in sc:
                return sc[name]
        raise KeyError(name)

    def expr(e):
        for node in A.walk_expr(e):
            if isinstance(node, A.Var):
                out[id(node)] = lookup(node.name)

    def block(stmts):
        scopes.append({})
        for s in stmts:
            if isinstance(s, A.Decl):
                if s.init is not None:
                    expr(s.init)
                scopes[-1][s.name] = fresh(s.name)
                out[id(s)] = scopes[-1][s.name]
                if s.type == A.BOOL:
                    bools.add(out[id(s)])
            elif isinstance(s, A.Assign):
                expr(s.value)
                out[id(s)] = lookup(s.name)
            elif isinstance(s, A.If):
                expr(s.cond)
                block(s.then.stmts)
                if s.orelse is not None:
                    block(s.orelse.stmts)
            elif isinstance(s, A.While):
                expr(s.cond)
                block(s.body.stmts)
            elif isinstance(s, A.Block):
                block(s.stmts)
            else:
                for e in A.stmt_exprs(s):
                    expr(e)
        scopes.pop()

    block(fn.body.stmts)


def _is_pure(e) -> bool:
    """True if ``e`` has no calls, reads or possible faults."""
    for node in A.walk_expr(e):
        if isinstance(node, (A.CallExpr, A.NondetInt, A.NondetBool)):
            return False
        if isinstance(node, A.BinOp) and node.op in ("/", "%"):
            return False
    return True


def _is_simple(s) -> bool:
    """Statements that can neither fork nor end the path early (labels aside)."""
    if isinstance(s, A.Label):
        return True
    if isinstance(s, A.Decl):
        return s.init is None or _is_pure(s.init)
    if isinstance(s, A.Assign):
        return _is_pure(s.value)
    return False


ERROR_MARK = "error"


def _expr_calls(e):
    return [n.name for n in A.walk_expr(e) if isinstance(n, A.CallExpr)]


def _has_calls(s) -> bool:
    return any(_expr_calls(e) for e in A.stmt_exprs(s))


def _direct_marks(stmts):
    """Labels, error calls and callee names occurring syntactically in ``stmts``."""
    marks, callees = set(), set()
    for s in A.walk_stmts(stmts):
        if isinstance(s, A.Label) and s.goal_id is not None:
            marks.add(s.goal_id)
        elif isinstance(s, A.AssertFail):
            marks.add(ERROR_MARK)
            callees.add(A.REACH_ERROR)
        for e in A.stmt_exprs(s):
            callees.update(_expr_calls(e))
    return marks, callees


def _function_marks(program: A.MiniCProgram) -> dict:
    direct = {fn.name: _direct_marks(fn.body.stmts) for fn in program.functions}
    marks = {name: set(m) for name, (m, _c) in direct.items()}
    changed = True
    while changed:
        changed = False
        for name, (_m, callees) in direct.items():
            for c in callees:
                extra = marks.get(c, set()) - marks[name]
                if extra:
                    marks[name] |= extra
                    changed = True
    return {name: frozenset(m) for name, m in marks.items()}


def _stmt_marks(s, fn_marks: dict, fdecls: dict) -> frozenset:
    marks, callees = _direct_marks([s])
    for c in callees:
        marks |= fn_marks.get(c, frozenset())
    return frozenset(marks)


class SymbolicExecutor:
    def __init__(self, program: A.MiniCProgram, width: int = 32, k: int = 8,
                 target: Optional[int] = None, check_errors: bool = False,
                 node_budget: int = 200_000, deadline: Optional[float] = None,
                 solver_nodes: int = 20_000, ancestors=()):
        self.program = program
        self.width = width
        self.k = k
        self.target = target
        self.check_errors = check_errors
        self.node_budget = node_budget
        self.deadline = deadline
        self.solver_nodes = solver_nodes
        self.tb = TermBuilder(width)
        self.solver = Solver(width)
        self.prop = self.solver.prop
        self.vmin, self.vmax = -self.tb.half, self.tb.half - 1
        self.fdecls = {fn.name: fn for fn in program.functions}
        self.names: dict = {}
        self.bool_vars: set = set()
        for fn in program.functions:
            _resolve_names(fn, self.names, self.bool_vars)
        self.site_of = {id(e): i for i, e in enumerate(nondet_sites(program))}
        self.nodes = 0
        self.gave_up = False
        self.ancestors = frozenset(ancestors)
        self.best = None  # (score, box, sites, kinds) of the most promising path
        self.paths_cut = 0
        self.paths_pruned = 0
        self.wanted = {target} | ({ERROR_MARK} if check_errors else set())
        self._fn_marks = _function_marks(program)
        self._marks: dict = {}
        self._suffix: dict = {}

    # -- relevance ------------------------------------------------------------

    def marks(self, s) -> frozenset:
        """Goal ids (and the error mark) that executing ``s`` can meet."""
        hit = self._marks.get(id(s))
        if hit is None:
            hit = _stmt_marks(s, self._fn_marks, self.fdecls)
            self._marks[id(s)] = hit
        return hit

    def suffix(self, stmts) -> list:
        """``suffix(stmts)[i]``: can ``stmts[i:]`` reach the target?"""
        hit = self._suffix.get(id(stmts))
        if hit is None:
            hit = [False] * (len(stmts) + 1)
            for j in range(len(stmts) - 1, -1, -1):
                hit[j] = hit[j + 1] or bool(self.marks(stmts[j]) & self.wanted)
            self._suffix[id(stmts)] = hit
        return hit

    # -- bookkeeping ----------------------------------------------------------

    def tick(self):
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise OutOfBudget()
        if self.deadline is not None and self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            raise OutOfBudget()

    def _note_progress(self, st: State, box=None):
        score = (len(self.ancestors.intersection(st.goals)), st.reads)
        if self.best is None or score > self.best[0]:
            self.best = (score, dict(box if box is not None else st.box), st.sites, st.kinds)

    def assume(self, st: State, cond) -> bool:
        """Conjoin ``cond`` to the path condition; False if refuted."""
        if cond[0] == "const":
            return cond[1] != 0
        box = dict(st.box)
        pc = st.pc + (cond,)
        if not self.prop.require(cond, True, box, {}):
            return False
        if box != st.box:
            # The new fact narrowed something; let the older facts react.
            if not self.prop.propagate(pc, box, rounds=2):
                return False
        elif self.prop.status((cond,), box) is False:
            return False
        st.pc = pc
        st.box = box
        return True

    def solve_path(self, st: State):
        domains = dict(st.box)
        # Solver work is charged to the same node budget as path exploration.
        limit = max(1, min(self.solver_nodes, self.node_budget - self.nodes))
        res = self.solver.solve(st.pc, domains, node_limit=limit, deadline=self.deadline)
        self.nodes += res.nodes
        if self.nodes > self.node_budget and res.status is Status.UNKNOWN:
            self.gave_up = True
            self._note_progress(st, res.box or st.box)
            raise OutOfBudget()
        return res

    def _model(self, st: State, model: dict) -> dict:
        out = {}
        for i in range(st.reads):
            if i in model:
                out[i] = model[i]
            else:
                lo, hi = st.box[i]
                out[i] = 0 if lo <= 0 <= hi else (lo if lo > 0 else hi)
        return out

    def _at_interesting_point(self, st: State, is_error: bool):
        res = self.solve_path(st)
        if res.status is Status.SAT:
            raise Found(self._model(st, res.model), st, is_error)
        if res.status is Status.UNKNOWN:
            self.gave_up = True
            self._note_progress(st, res.box or st.box)

    # -- entry ----------------------------------------------------------------

    def run(self) -> None:
        """Explore all paths; raises ``Found`` on success, ``OutOfBudget`` on exhaustion."""
        main = self.program.main
        st = State([{}], calls=(main.name,))
        for _st, _ctl in self.exec_block(main.body.stmts, st):
            pass

    # -- statements -----------------------------------------------------------

    def exec_block(self, stmts, st: State, i: int = 0):
        suffix = self.suffix(stmts)
        while i < len(stmts):
            if not (suffix[i] or st.cont[-1]):
                # Nothing left on this path can reach the target.
                self.paths_pruned += 1
                return
            s = stmts[i]
            i += 1
            if _is_simple(s):
                # Straight-line statements that cannot fork run in place.
                self.tick()
                if not self.exec_simple(s, st):
                    return
                continue
            after = st.cont[-1] or suffix[i]
            if not after and (isinstance(s, A.While) or _has_calls(s)):
                # loop bodies and callees continue into the statement itself
                after = bool(self.marks(s) & self.wanted)
            st.cont = st.cont + (after,)
            for st2, ctl in self.exec_stmt(s, st):
                st2.cont = st2.cont[:-1]
                if ctl is not None:
                    yield st2, ctl
                else:
                    yield from self.exec_block(stmts, st2, i)
            return
        yield st, None

    def exec_simple(self, s, st: State) -> bool:
        if isinstance(s, A.Label):
            gid = s.goal_id
            if gid is None:
                return True
            if gid not in st.goals:
                st.goals = st.goals + (gid,)
            if gid == self.target:
                self._at_interesting_point(st, False)
                return False
            if gid in self.ancestors:
                self._note_progress(st)
            return True
        e = s.init if isinstance(s, A.Decl) else s.value
        self.store(s, ZERO if e is None else self.pure(e, st), st)
        return True

    def store(self, s, t, st: State) -> None:
        key = self.names[id(s)]
        st.env[key] = self.tb.truth(t) if key in self.bool_vars else t

    def exec_stmt(self, s, st: State):
        self.tick()
        if isinstance(s, (A.Decl, A.Assign)):
            e = s.init if isinstance(s, A.Decl) else s.value
            for st2, t in self.eval(e, st):
                self.store(s, t, st2)
                yield st2, None
        elif isinstance(s, A.Block):
            yield from self.exec_block(s.stmts, st)
        elif isinstance(s, A.If):
            for st2, c in self.eval(s.cond, st):
                yield from self._branch(st2, c, s.then.stmts, s.orelse.stmts if s.orelse else [])
        elif isinstance(s, A.While):
            yield from self.exec_while(s, st, 0)
        elif isinstance(s, A.Return):
            if s.value is None:
                yield st, ("ret", ZERO)
            else:
                for st2, t in self.eval(s.value, st):
                    yield st2, ("ret", t)
        elif isinstance(s, A.Call):
            for st2, _t in self.eval(s.call, st):
                yield st2, None
        elif isinstance(s, A.AssertFail):
            yield from self.exec_reach_error(st)
        else:
            raise TypeError(f"cannot execute {s!r}")

    def _branch(self, st: State, c, then_stmts, else_stmts):
        t_true = self.tb.truth(c)
        t_false = self.tb.lnot(c)
        then_st = st.copy()
        if self.assume(then_st, t_true):
            yield from self.exec_block(then_stmts, then_st)
        if self.assume(st, t_false):
            yield from self.exec_block(else_stmts, st)

    def exec_while(self, s: A.While, st: State, it: int):
        for st2, c in self.eval(s.cond, st):
            body_st = st2.copy()
            if it < self.k and self.assume(body_st, self.tb.truth(c)):
                for st3, ctl in self.exec_block(s.body.stmts, body_st):
                    if ctl is not None:
                        yield st3, ctl
                    else:
                        yield from self.exec_while(s, st3, it + 1)
            elif it >= self.k:
                self.paths_cut += 1
            if self.assume(st2, self.tb.lnot(c)):
                yield st2, None

    def exec_reach_error(self, st: State):
        fn = self.fdecls.get(A.REACH_ERROR)
        if fn is not None:
            # Its labels are goals too; the path ends once the body finishes.
            for st2, _ret in self.call_function(fn, [], st):
                if self.check_errors:
                    self._at_interesting_point(st2, True)
        elif self.check_errors:
            self._at_interesting_point(st, True)
        return
        yield  # pragma: no cover - makes this a generator

    def call_function(self, fn: A.FunctionDecl, args, st: State):
        if st.calls.count(fn.name) > self.k:
            self.paths_cut += 1
            return
        frame = dict(zip(self.names[("params", id(fn))], args))
        st.frames = st.frames + [frame]
        st.calls = st.calls + (fn.name,)
        for st2, ctl in self.exec_block(fn.body.stmts, st):
            ret = ctl[1] if ctl is not None and ctl[0] == "ret" else ZERO
            if fn.ret_type == A.BOOL:
                ret = self.tb.truth(ret)
            st2.frames = st2.frames[:-1]
            st2.calls = st2.calls[:-1]
            yield st2, ret

    # -- expressions ----------------------------------------------------------

    def pure(self, e, st: State):
        tb = self.tb
        if isinstance(e, A.IntLit):
            return tb.const(e.value)
        if isinstance(e, A.BoolLit):
            return tb.const(1 if e.value else 0)
        if isinstance(e, A.Var):
            return st.env[self.names[id(e)]]
        if isinstance(e, A.UnOp):
            x = self.pure(e.operand, st)
            return tb.lnot(x) if e.op == "!" else tb.neg(x)
        if isinstance(e, A.BinOp):
            a = self.pure(e.left, st)
            b = self.pure(e.right, st)
            if e.op in ("&&", "||"):
                return tb.binop(e.op, tb.truth(a), tb.truth(b))
            return tb.binop(e.op, a, b)
        raise TypeError(f"not a pure expression: {e!r}")

    def eval(self, e, st: State):
        """Yield ``(state, term)`` for every feasible way of evaluating ``e``."""
        if _is_pure(e):
            yield st, self.pure(e, st)
            return
        tb = self.tb
        if isinstance(e, (A.NondetInt, A.NondetBool)):
            i = st.reads
            is_bool = isinstance(e, A.NondetBool)
            st.box[i] = (0, 1) if is_bool else (self.vmin, self.vmax)
            st.sites = st.sites + (self.site_of[id(e)],)
            st.kinds = st.kinds + (A.BOOL if is_bool else A.INT,)
            yield st, ("sym", i)
        elif isinstance(e, A.UnOp):
            for st2, x in self.eval(e.operand, st):
                yield st2, tb.lnot(x) if e.op == "!" else tb.neg(x)
        elif isinstance(e, A.CallExpr):
            yield from self._eval_call(e, st, 0, [])
        elif isinstance(e, A.BinOp) and e.op in ("&&", "||"):
            for st2, a in self.eval(e.left, st):
                a = tb.truth(a)
                short_st = st2.copy()
                short = tb.lnot(a) if e.op == "&&" else a
                if self.assume(short_st, short):
                    yield short_st, tb.const(0 if e.op == "&&" else 1)
                go_on = a if e.op == "&&" else tb.lnot(a)
                if self.assume(st2, go_on):
                    for st3, b in self.eval(e.right, st2):
                        yield st3, tb.truth(b)
        elif isinstance(e, A.BinOp):
            for st2, a in self.eval(e.left, st):
                for st3, b in self.eval(e.right, st2):
                    if e.op in ("/", "%"):
                        # A zero divisor faults; only the non-faulting path continues.
                        if not self.assume(st3, tb.binop("!=", b, ZERO)):
                            continue
                    yield st3, tb.binop(e.op, a, b)
        else:
            raise TypeError(f"cannot evaluate {e!r}")

    def _eval_call(self, e: A.CallExpr, st: State, i: int, vals: list):
        if i < len(e.args):
            for st2, v in self.eval(e.args[i], st):
                yield from self._eval_call(e, st2, i + 1, vals + [v])
            return
        fn = self.fdecls[e.name]
        vals = [self.tb.truth(v) if p.type == A.BOOL else v for p, v in zip(fn.params, vals)]
        yield from self.call_function(fn, vals, st)
