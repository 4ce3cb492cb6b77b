"""Random MiniC programs for differential and oracle tests.

Generated programs read at most ``max_reads`` nondet values, never inside a
loop or a helper, and every loop runs a constant number of times, so the
input space of a program is exactly ``2**width`` values per read.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

CMP = ("==", "!=", "<", "<=", ">", ">=")
ARITH = ("+", "-", "*", "+", "-")


@dataclass
class _Ctx:
    ints: list = field(default_factory=list)
    bools: list = field(default_factory=list)
    counters: set = field(default_factory=set)
    reads_left: int = 0
    allow_reads: bool = True
    in_main: bool = True


class ProgramGenerator:
    def __init__(self, seed: int, width: int = 6, max_reads: int = 3, max_depth: int = 3):
        self.rng = random.Random(seed)
        self.width = width
        self.max_reads = max_reads
        self.max_depth = max_depth
        self.lim = 1 << (width - 1)
        self.fresh = 0
        self.helpers: list = []

    def name(self, prefix: str) -> str:
        self.fresh += 1
        return f"{prefix}{self.fresh}"

    def const(self) -> str:
        return str(self.rng.randint(-self.lim + 1, self.lim - 1))

    # -- expressions ---------------------------------------------------------

    def atom(self, ctx: _Ctx) -> str:
        pool = ctx.ints + sorted(ctx.counters)
        if pool and self.rng.random() < 0.75:
            return self.rng.choice(pool)
        return self.const()

    def arith(self, ctx: _Ctx, depth: int = 2) -> str:
        r = self.rng.random()
        if depth == 0 or r < 0.35:
            return self.atom(ctx)
        if r < 0.45:
            return f"-({self.arith(ctx, depth - 1)})"
        if r < 0.55:
            op = self.rng.choice(("/", "%"))
            # divisors are mostly non-zero constants; variables occasionally fault
            div = self.atom(ctx) if self.rng.random() < 0.3 else str(self.rng.choice((2, 3, 5, 7, -3)))
            return f"({self.arith(ctx, depth - 1)} {op} {div})"
        if r < 0.6 and self.helpers and ctx.in_main:
            name, arity = self.rng.choice(self.helpers)
            return f"{name}({', '.join(self.atom(ctx) for _ in range(arity))})"
        op = self.rng.choice(ARITH)
        return f"({self.arith(ctx, depth - 1)} {op} {self.arith(ctx, depth - 1)})"

    def cond(self, ctx: _Ctx, depth: int = 1) -> str:
        r = self.rng.random()
        if ctx.bools and r < 0.15:
            b = self.rng.choice(ctx.bools)
            return b if self.rng.random() < 0.5 else f"!{b}"
        if depth > 0 and r < 0.35:
            op = self.rng.choice(("&&", "||"))
            return f"({self.cond(ctx, depth - 1)} {op} {self.cond(ctx, depth - 1)})"
        return f"{self.arith(ctx, 1)} {self.rng.choice(CMP)} {self.arith(ctx, 1)}"

    # -- statements ----------------------------------------------------------

    def read_decl(self, ctx: _Ctx, indent: str) -> list:
        ctx.reads_left -= 1
        if self.rng.random() < 0.2:
            v = self.name("b")
            ctx.bools.append(v)
            return [f"{indent}bool {v} = __VERIFIER_nondet_bool();"]
        v = self.name("x")
        ctx.ints.append(v)
        return [f"{indent}int {v} = __VERIFIER_nondet_int();"]

    def block(self, ctx: _Ctx, depth: int, indent: str, n: int) -> list:
        outer_ints, outer_bools = list(ctx.ints), list(ctx.bools)
        out: list = []
        for _ in range(n):
            out += self.stmt(ctx, depth, indent)
        ctx.ints, ctx.bools = outer_ints, outer_bools
        return out

    def stmt(self, ctx: _Ctx, depth: int, indent: str) -> list:
        r = self.rng.random()
        if ctx.allow_reads and ctx.reads_left > 0 and r < 0.3:
            return self.read_decl(ctx, indent)
        if depth > 0 and r < 0.55:
            then = self.block(ctx, depth - 1, indent + "  ", self.rng.randint(1, 3))
            lines = [f"{indent}if ({self.cond(ctx)}) {{", *then]
            if self.rng.random() < 0.5:
                orelse = self.block(ctx, depth - 1, indent + "  ", self.rng.randint(1, 2))
                lines += [f"{indent}}} else {{", *orelse]
            return lines + [f"{indent}}}"]
        if depth > 0 and r < 0.65:
            return self.loop(ctx, depth, indent)
        nested = depth < self.max_depth
        r = self.rng.random()
        if r < 0.08 and ctx.in_main and nested:
            return [f"{indent}reach_error();"]
        if r < 0.14 and nested:
            return [f"{indent}return {self.arith(ctx, 1)};"]
        if ctx.ints and r < 0.6:
            return [f"{indent}{self.rng.choice(ctx.ints)} = {self.arith(ctx)};"]
        v = self.name("v")
        line = f"{indent}int {v} = {self.arith(ctx)};"
        ctx.ints.append(v)
        return [line]

    def loop(self, ctx: _Ctx, depth: int, indent: str) -> list:
        i = self.name("i")
        bound = self.rng.randint(1, 3)
        saved = ctx.allow_reads
        ctx.allow_reads = False
        ctx.counters.add(i)
        body = self.block(ctx, depth - 1, indent + "  ", self.rng.randint(1, 2))
        ctx.counters.discard(i)
        ctx.allow_reads = saved
        return [
            f"{indent}int {i} = 0;",
            f"{indent}while ({i} < {bound}) {{",
            *body,
            f"{indent}  {i} = {i} + 1;",
            f"{indent}}}",
        ]

    def helper(self) -> str:
        name = self.name("h")
        arity = self.rng.randint(1, 2)
        params = [self.name("p") for _ in range(arity)]
        ctx = _Ctx(ints=list(params), allow_reads=False, in_main=False)
        body = self.block(ctx, 1, "  ", self.rng.randint(1, 3))
        body.append(f"  return {self.arith(ctx, 1)};")
        self.helpers.append((name, arity))
        sig = ", ".join(f"int {p}" for p in params)
        return "\n".join([f"int {name}({sig}) {{", *body, "}"])

    def program(self) -> str:
        parts = [self.helper() for _ in range(self.rng.randint(0, 1))]
        ctx = _Ctx(reads_left=self.max_reads)
        body: list = []
        for _ in range(self.rng.randint(1, self.max_reads)):
            body += self.read_decl(ctx, "  ")
        body += self.block(ctx, self.max_depth, "  ", self.rng.randint(2, 4))
        body.append("  return 0;")
        parts.append("\n".join(["int main() {", *body, "}"]))
        return "\n\n".join(parts) + "\n"


def generate(seed: int, width: int = 6, max_reads: int = 3) -> str:
    return ProgramGenerator(seed, width, max_reads).program()
