"""Concrete execution of MiniC programs.

Programs are compiled once into nested closures over slot-indexed frames;
executing a test case then runs those closures against a fresh machine state.
Arithmetic is two's complement with wrap-around at the configured width.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .analysis import nondet_sites, loops_in_order
from .frontend import ast as A

DEFAULT_STEP_LIMIT = 10**6
MAX_CALL_DEPTH = 500


class OutcomeKind(str, enum.Enum):
    RETURNED = "Returned"
    REACHED_ERROR = "ReachedError"
    RUNTIME_FAULT = "RuntimeFault"
    INPUT_EXHAUSTED = "InputExhausted"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    detail: object = None  # return code or fault kind

    def __str__(self):
        if self.detail is None:
            return self.kind.value
        return f"{self.kind.value}({self.detail})"


@dataclass(frozen=True)
class ExecutionTrace:
    goals_hit: tuple
    edges: frozenset
    read_sites: tuple
    read_types: tuple
    outcome: Outcome
    input_exhausted: bool = False
    steps: int = 0
    error_goal: Optional[int] = None  # last goal met before reach_error()

    @property
    def nondet_reads(self) -> int:
        return len(self.read_sites)

    @property
    def reached_error(self) -> bool:
        return self.outcome.kind is OutcomeKind.REACHED_ERROR


class _ReachError(Exception):
    pass


class _Fault(Exception):
    def __init__(self, kind):
        self.kind = kind


class _StepLimit(Exception):
    pass


class _InputStop(Exception):
    pass


@dataclass
class _Machine:
    inputs: tuple
    step_limit: int
    loop_caps: dict
    stop_on_exhaust: bool
    pos: int = 0
    steps: int = 0
    depth: int = 0
    last: Optional[int] = None
    exhausted: bool = False
    error_goal: Optional[int] = None
    goals: list = field(default_factory=list)
    seen: set = field(default_factory=set)
    edges: set = field(default_factory=set)
    read_sites: list = field(default_factory=list)
    read_types: list = field(default_factory=list)


class CompiledProgram:
    def __init__(self, program: A.MiniCProgram, width: int = 32):
        self.program = program
        self.width = width
        self.half = 1 << (width - 1)
        self.mask = (1 << width) - 1
        self.site_of = {id(e): i for i, e in enumerate(nondet_sites(program))}
        self.loop_of = {id(s): i for i, s in enumerate(loops_in_order(program))}
        self.fdecls = {fn.name: fn for fn in program.functions}
        self.functions = {}
        for fn in program.functions:
            self.functions[fn.name] = None
        for fn in program.functions:
            self.functions[fn.name] = self._compile_function(fn)

    # -- value helpers -------------------------------------------------------

    def wrap(self, v: int) -> int:
        return ((v + self.half) & self.mask) - self.half

    # -- functions -----------------------------------------------------------

    def _compile_function(self, fn: A.FunctionDecl):
        scopes = [{}]
        slots = []

        def declare(name, ty):
            idx = len(slots)
            slots.append(ty)
            scopes[-1][name] = idx
            return idx

        param_slots = [declare(p.name, p.type) for p in fn.params]
        body = self._compile_block(fn.body.stmts, scopes, slots, declare)
        nslots_ref = slots
        ret_bool = fn.ret_type == A.BOOL
        param_bool = [p.type == A.BOOL for p in fn.params]

        def call(args, m):
            m.depth += 1
            if m.depth > MAX_CALL_DEPTH:
                raise _Fault("stack-overflow")
            fr = [0] * len(nslots_ref)
            for i, (slot, v) in enumerate(zip(param_slots, args)):
                fr[slot] = (1 if v else 0) if param_bool[i] else v
            r = body(fr, m)
            m.depth -= 1
            if r is None:
                return 0
            v = r[0]
            return (1 if v else 0) if ret_bool else v

        return call

    # -- statements ----------------------------------------------------------

    def _compile_block(self, stmts, scopes, slots, declare):
        scopes.append({})
        compiled = [self._compile_stmt(s, scopes, slots, declare) for s in stmts]
        scopes.pop()
        compiled = [c for c in compiled if c is not None]

        def run(fr, m):
            for s in compiled:
                m.steps += 1
                if m.steps > m.step_limit:
                    raise _StepLimit()
                r = s(fr, m)
                if r is not None:
                    return r
            return None

        return run

    def _lookup(self, name, scopes):
        for sc in reversed(scopes):
            if name in sc:
                return sc[name]
        raise KeyError(name)

    def _compile_stmt(self, s, scopes, slots, declare):
        if isinstance(s, A.Label):
            gid = s.goal_id
            if gid is None:
                return None

            def hit(fr, m):
                if m.last is not None:
                    m.edges.add((m.last, gid))
                m.last = gid
                if gid not in m.seen:
                    m.seen.add(gid)
                    m.goals.append(gid)

            return hit
        if isinstance(s, A.Decl):
            init = self._compile_expr(s.init, scopes) if s.init is not None else None
            slot = declare(s.name, s.type)
            is_bool = s.type == A.BOOL
            if init is None:
                def decl(fr, m):
                    fr[slot] = 0
            elif is_bool:
                def decl(fr, m):
                    fr[slot] = 1 if init(fr, m) else 0
            else:
                def decl(fr, m):
                    fr[slot] = init(fr, m)
            return decl
        if isinstance(s, A.Assign):
            value = self._compile_expr(s.value, scopes)
            slot = self._lookup(s.name, scopes)
            if slots[slot] == A.BOOL:
                def assign(fr, m):
                    fr[slot] = 1 if value(fr, m) else 0
            else:
                def assign(fr, m):
                    fr[slot] = value(fr, m)
            return assign
        if isinstance(s, A.Return):
            if s.value is None:
                return lambda fr, m: (0,)
            value = self._compile_expr(s.value, scopes)
            return lambda fr, m: (value(fr, m),)
        if isinstance(s, A.Call):
            call = self._compile_expr(s.call, scopes)

            def call_stmt(fr, m):
                call(fr, m)

            return call_stmt
        if isinstance(s, A.AssertFail):
            functions = self.functions
            has_body = A.REACH_ERROR in self.fdecls

            def fail(fr, m):
                m.error_goal = m.last
                if has_body:
                    functions[A.REACH_ERROR]((), m)
                raise _ReachError()

            return fail
        if isinstance(s, A.Block):
            return self._compile_block(s.stmts, scopes, slots, declare)
        if isinstance(s, A.If):
            cond = self._compile_expr(s.cond, scopes)
            then = self._compile_block(s.then.stmts, scopes, slots, declare)
            if s.orelse is None:
                def if_stmt(fr, m):
                    if cond(fr, m):
                        return then(fr, m)
                    return None
            else:
                orelse = self._compile_block(s.orelse.stmts, scopes, slots, declare)

                def if_stmt(fr, m):
                    if cond(fr, m):
                        return then(fr, m)
                    return orelse(fr, m)
            return if_stmt
        if isinstance(s, A.While):
            cond = self._compile_expr(s.cond, scopes)
            body = self._compile_block(s.body.stmts, scopes, slots, declare)
            lid = self.loop_of[id(s)]

            def while_stmt(fr, m):
                cap = m.loop_caps.get(lid)
                n = 0
                while cond(fr, m):
                    n += 1
                    if cap is not None and n > cap:
                        raise _StepLimit()
                    m.steps += 1
                    if m.steps > m.step_limit:
                        raise _StepLimit()
                    r = body(fr, m)
                    if r is not None:
                        return r
                return None

            return while_stmt
        raise TypeError(f"cannot compile {s!r}")

    # -- expressions ---------------------------------------------------------

    def _compile_expr(self, e, scopes):
        wrap = self.wrap
        if isinstance(e, A.IntLit):
            v = wrap(e.value)
            return lambda fr, m: v
        if isinstance(e, A.BoolLit):
            v = 1 if e.value else 0
            return lambda fr, m: v
        if isinstance(e, A.Var):
            slot = self._lookup(e.name, scopes)
            return lambda fr, m: fr[slot]
        if isinstance(e, (A.NondetInt, A.NondetBool)):
            site = self.site_of[id(e)]
            is_bool = isinstance(e, A.NondetBool)
            kind = A.BOOL if is_bool else A.INT

            def read(fr, m):
                m.read_sites.append(site)
                m.read_types.append(kind)
                if m.pos < len(m.inputs):
                    v = m.inputs[m.pos]
                else:
                    m.exhausted = True
                    if m.stop_on_exhaust:
                        raise _InputStop()
                    v = 0
                m.pos += 1
                if is_bool:
                    return 1 if v else 0
                return wrap(v)

            return read
        if isinstance(e, A.CallExpr):
            args = [self._compile_expr(a, scopes) for a in e.args]
            functions = self.functions
            name = e.name

            def call(fr, m):
                vals = [a(fr, m) for a in args]
                return functions[name](vals, m)

            return call
        if isinstance(e, A.UnOp):
            x = self._compile_expr(e.operand, scopes)
            if e.op == "!":
                return lambda fr, m: 0 if x(fr, m) else 1
            return lambda fr, m: wrap(-x(fr, m))
        if isinstance(e, A.BinOp):
            left = self._compile_expr(e.left, scopes)
            right = self._compile_expr(e.right, scopes)
            return _BINOPS[e.op](left, right, wrap)
        raise TypeError(f"cannot compile {e!r}")


def _div(a, b):
    if b == 0:
        raise _Fault("division-by-zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _mod(a, b):
    if b == 0:
        raise _Fault("division-by-zero")
    return a - b * _div(a, b)


_BINOPS = {
    "+": lambda l, r, w: lambda fr, m: w(l(fr, m) + r(fr, m)),
    "-": lambda l, r, w: lambda fr, m: w(l(fr, m) - r(fr, m)),
    "*": lambda l, r, w: lambda fr, m: w(l(fr, m) * r(fr, m)),
    "/": lambda l, r, w: lambda fr, m: w(_div(l(fr, m), r(fr, m))),
    "%": lambda l, r, w: lambda fr, m: w(_mod(l(fr, m), r(fr, m))),
    "==": lambda l, r, w: lambda fr, m: 1 if l(fr, m) == r(fr, m) else 0,
    "!=": lambda l, r, w: lambda fr, m: 1 if l(fr, m) != r(fr, m) else 0,
    "<": lambda l, r, w: lambda fr, m: 1 if l(fr, m) < r(fr, m) else 0,
    "<=": lambda l, r, w: lambda fr, m: 1 if l(fr, m) <= r(fr, m) else 0,
    ">": lambda l, r, w: lambda fr, m: 1 if l(fr, m) > r(fr, m) else 0,
    ">=": lambda l, r, w: lambda fr, m: 1 if l(fr, m) >= r(fr, m) else 0,
    "&&": lambda l, r, w: lambda fr, m: 1 if (l(fr, m) and r(fr, m)) else 0,
    "||": lambda l, r, w: lambda fr, m: 1 if (l(fr, m) or r(fr, m)) else 0,
}


_CACHE: dict = {}
_CACHE_SIZE = 128


def compile_program(program: A.MiniCProgram, width: int = 32) -> CompiledProgram:
    key = (id(program), width)
    hit = _CACHE.get(key)
    if hit is not None and hit.program is program:
        return hit
    compiled = CompiledProgram(program, width)
    if len(_CACHE) >= _CACHE_SIZE:
        _CACHE.pop(next(iter(_CACHE)))
    _CACHE[key] = compiled
    return compiled


def execute(
    program: A.MiniCProgram,
    values,
    step_limit: int = DEFAULT_STEP_LIMIT,
    width: int = 32,
    loop_caps: Optional[dict] = None,
    stop_on_exhaust: bool = False,
) -> ExecutionTrace:
    """Run ``program`` feeding ``values`` to its nondet reads, in order.

    Reads past the end of ``values`` yield 0 and flag the trace, unless
    ``stop_on_exhaust`` asks for an ``InputExhausted`` outcome instead.
    """
    cp = compile_program(program, width)
    m = _Machine(tuple(values), step_limit, loop_caps or {}, stop_on_exhaust)
    try:
        code = cp.functions[program.entry]((), m)
        outcome = Outcome(OutcomeKind.RETURNED, code)
    except _ReachError:
        outcome = Outcome(OutcomeKind.REACHED_ERROR)
    except _Fault as f:
        outcome = Outcome(OutcomeKind.RUNTIME_FAULT, f.kind)
    except _StepLimit:
        outcome = Outcome(OutcomeKind.STEP_LIMIT)
    except _InputStop:
        outcome = Outcome(OutcomeKind.INPUT_EXHAUSTED)
    except RecursionError:
        outcome = Outcome(OutcomeKind.RUNTIME_FAULT, "stack-overflow")
    return ExecutionTrace(
        goals_hit=tuple(m.goals),
        edges=frozenset(m.edges),
        read_sites=tuple(m.read_sites),
        read_types=tuple(m.read_types),
        outcome=outcome,
        input_exhausted=m.exhausted,
        steps=m.steps,
        error_goal=m.error_goal,
    )
