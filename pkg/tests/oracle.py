"""Reference semantics for MiniC, evaluated over many inputs at once.

Every lane of a numpy vector is one concrete run; control flow is handled with
boolean masks.  Only the AST node types are shared with the package, so this
interpreter serves as an independent oracle for reachability and outcomes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from hybrid_testgen.frontend import ast as A

RETURNED, REACHED_ERROR, FAULT, RUNNING = 0, 1, 2, 3


@dataclass
class _Call:
    ret_mask: np.ndarray
    ret_val: np.ndarray


@dataclass
class MaskedResult:
    goal_lanes: dict  # goal id -> lanes that executed the label
    status: np.ndarray  # RETURNED / REACHED_ERROR / FAULT per lane
    value: np.ndarray  # main's return value where status == RETURNED
    inputs: np.ndarray = field(repr=False, default=None)

    @property
    def reachable(self) -> set:
        return {g for g, lanes in self.goal_lanes.items() if lanes.any()}

    def lane_goals(self, lane: int) -> set:
        return {g for g, lanes in self.goal_lanes.items() if lanes[lane]}


class MaskedInterpreter:
    def __init__(self, program: A.MiniCProgram, inputs: np.ndarray, width: int):
        self.program = program
        self.inputs = np.asarray(inputs, dtype=np.int64)
        self.n = self.inputs.shape[0]
        self.width = width
        self.half = 1 << (width - 1)
        self.mask = (1 << width) - 1
        self.pos = np.zeros(self.n, dtype=np.int64)
        self.alive = np.ones(self.n, dtype=bool)
        self.status = np.full(self.n, RUNNING, dtype=np.int64)
        self.value = np.zeros(self.n, dtype=np.int64)
        self.goal_lanes: dict = {}
        self.functions = {fn.name: fn for fn in program.functions}

    def wrap(self, v):
        return ((v + self.half) & self.mask) - self.half

    def zeros(self):
        return np.zeros(self.n, dtype=np.int64)

    def run(self) -> MaskedResult:
        main = self.functions[self.program.entry]
        ctx = _Call(np.zeros(self.n, dtype=bool), self.zeros())
        self.exec_block(main.body.stmts, [{}], self.alive.copy(), ctx, main.ret_type)
        done = self.alive & (self.status == RUNNING)
        self.status[done] = RETURNED
        self.value[done] = np.where(ctx.ret_mask, ctx.ret_val, 0)[done]
        return MaskedResult(self.goal_lanes, self.status, self.value, self.inputs)

    # -- statements ----------------------------------------------------------

    def exec_block(self, stmts, scopes, active, ctx, ret_type):
        scopes.append({})
        for s in stmts:
            active = active & self.alive & ~ctx.ret_mask
            if not active.any():
                break
            self.exec_stmt(s, scopes, active, ctx, ret_type)
        scopes.pop()

    def lookup(self, scopes, name):
        for sc in reversed(scopes):
            if name in sc:
                return sc
        raise KeyError(name)

    def exec_stmt(self, s, scopes, active, ctx, ret_type):
        if isinstance(s, A.Label):
            gid = s.goal_id
            if gid is not None:
                lanes = self.goal_lanes.setdefault(gid, np.zeros(self.n, dtype=bool))
                lanes |= active
        elif isinstance(s, A.Decl):
            v = self.eval(s.init, scopes, active) if s.init is not None else self.zeros()
            if s.type == A.BOOL:
                v = (v != 0).astype(np.int64)
            old = scopes[-1].get(s.name, self.zeros())
            scopes[-1][s.name] = np.where(active, v, old)
        elif isinstance(s, A.Assign):
            v = self.eval(s.value, scopes, active)
            sc = self.lookup(scopes, s.name)
            sc[s.name] = np.where(active, v, sc[s.name])
        elif isinstance(s, A.Return):
            v = self.eval(s.value, scopes, active) if s.value is not None else self.zeros()
            if ret_type == A.BOOL:
                v = (v != 0).astype(np.int64)
            active = active & self.alive
            ctx.ret_val = np.where(active, v, ctx.ret_val)
            ctx.ret_mask = ctx.ret_mask | active
        elif isinstance(s, A.Call):
            self.eval(s.call, scopes, active)
        elif isinstance(s, A.AssertFail):
            if A.REACH_ERROR in self.functions:
                self.call(A.REACH_ERROR, [], active)
            active = active & self.alive
            self.status[active] = REACHED_ERROR
            self.alive &= ~active
        elif isinstance(s, A.Block):
            self.exec_block(s.stmts, scopes, active, ctx, ret_type)
        elif isinstance(s, A.If):
            c = self.eval(s.cond, scopes, active)
            active = active & self.alive
            self.exec_block(s.then.stmts, scopes, active & (c != 0), ctx, ret_type)
            if s.orelse is not None:
                self.exec_block(s.orelse.stmts, scopes, active & (c == 0), ctx, ret_type)
        elif isinstance(s, A.While):
            for _ in range(10_000):
                c = self.eval(s.cond, scopes, active)
                active = active & self.alive & (c != 0) & ~ctx.ret_mask
                if not active.any():
                    break
                self.exec_block(s.body.stmts, scopes, active, ctx, ret_type)
            else:
                raise RuntimeError("loop did not terminate within the oracle's bound")
        else:
            raise TypeError(s)

    # -- expressions ---------------------------------------------------------

    def fault(self, lanes):
        self.status[lanes & self.alive] = FAULT
        self.alive &= ~lanes

    def eval(self, e, scopes, active):
        if isinstance(e, A.IntLit):
            return np.full(self.n, self.wrap(e.value), dtype=np.int64)
        if isinstance(e, A.BoolLit):
            return np.full(self.n, int(e.value), dtype=np.int64)
        if isinstance(e, A.Var):
            return self.lookup(scopes, e.name)[e.name]
        if isinstance(e, (A.NondetInt, A.NondetBool)):
            cols = self.inputs.shape[1]
            idx = np.minimum(self.pos, max(cols - 1, 0))
            if cols:
                v = np.where(self.pos < cols, self.inputs[np.arange(self.n), idx], 0)
            else:
                v = self.zeros()
            self.pos = self.pos + active.astype(np.int64)
            if isinstance(e, A.NondetBool):
                return (v != 0).astype(np.int64)
            return self.wrap(v)
        if isinstance(e, A.CallExpr):
            args = [self.eval(a, scopes, active) for a in e.args]
            return self.call(e.name, args, active & self.alive)
        if isinstance(e, A.UnOp):
            x = self.eval(e.operand, scopes, active)
            if e.op == "!":
                return (x == 0).astype(np.int64)
            return self.wrap(-x)
        if isinstance(e, A.BinOp):
            op = e.op
            a = self.eval(e.left, scopes, active)
            if op == "&&":
                b = self.eval(e.right, scopes, active & (a != 0))
                return ((a != 0) & (b != 0)).astype(np.int64)
            if op == "||":
                b = self.eval(e.right, scopes, active & (a == 0))
                return ((a != 0) | (b != 0)).astype(np.int64)
            b = self.eval(e.right, scopes, active)
            if op in ("/", "%"):
                self.fault(active & (b == 0))
                safe = np.where(b == 0, 1, b)
                q = np.abs(a) // np.abs(safe)
                q = np.where((a < 0) == (safe < 0), q, -q)
                return self.wrap(q if op == "/" else a - safe * q)
            table = {
                "+": lambda: self.wrap(a + b),
                "-": lambda: self.wrap(a - b),
                "*": lambda: self.wrap(a * b),
                "==": lambda: (a == b).astype(np.int64),
                "!=": lambda: (a != b).astype(np.int64),
                "<": lambda: (a < b).astype(np.int64),
                "<=": lambda: (a <= b).astype(np.int64),
                ">": lambda: (a > b).astype(np.int64),
                ">=": lambda: (a >= b).astype(np.int64),
            }
            return table[op]()
        raise TypeError(e)

    def call(self, name, args, active):
        fn = self.functions[name]
        scope = {}
        for p, v in zip(fn.params, args):
            scope[p.name] = (v != 0).astype(np.int64) if p.type == A.BOOL else v
        ctx = _Call(np.zeros(self.n, dtype=bool), self.zeros())
        self.exec_block(fn.body.stmts, [scope], active, ctx, fn.ret_type)
        return np.where(ctx.ret_mask, ctx.ret_val, 0)


def run_masked(program: A.MiniCProgram, inputs, width: int) -> MaskedResult:
    return MaskedInterpreter(program, inputs, width).run()


def all_inputs(n_reads: int, width: int) -> np.ndarray:
    """Every input vector of ``n_reads`` values over the signed ``width``-bit domain."""
    half = 1 << (width - 1)
    if n_reads == 0:
        return np.zeros((1, 0), dtype=np.int64)
    axes = [np.arange(-half, half, dtype=np.int64)] * n_reads
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def reachable_goals(program: A.MiniCProgram, n_reads: int, width: int) -> set:
    return run_masked(program, all_inputs(n_reads, width), width).reachable


def enumerate_models(check, domains: dict):
    """Brute-force all assignments of ``domains`` (symbol -> (lo, hi)) accepted by ``check``."""
    keys = sorted(domains)
    for combo in itertools.product(*(range(lo, hi + 1) for lo, hi in (domains[k] for k in keys))):
        model = dict(zip(keys, combo))
        if check(model):
            yield model
