"""Symbolic terms over W-bit signed input symbols.

Terms are plain tuples so they hash cheaply and can be shared:

    ("const", v)  ("sym", i)  ("neg", t)  ("not", t)  (op, a, b)
    ("lin", k, ((atom, c), ...))

with ``op`` one of ``+ - * / % == != < <= > >= && ||``.  A ``lin`` term is the
wrapped sum ``k + c1*atom1 + ...`` over non-linear atoms; the builder keeps
sums and constant multiples in this form so that offsets and coefficients
collect instead of nesting.  Comparisons and the
logical operators evaluate to 0 or 1; arithmetic wraps at the term width.
Division and modulo truncate toward zero as in C.
"""

from __future__ import annotations

ARITH = ("+", "-", "*", "/", "%")
CMP = ("==", "!=", "<", "<=", ">", ">=")
LOGIC = ("&&", "||")
BOOLEAN_HEADS = set(CMP) | set(LOGIC) | {"not"}

_NEG_CMP = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def const(v):
    return ("const", v)


def sym(i):
    return ("sym", i)


ZERO = ("const", 0)
ONE = ("const", 1)


def is_const(t) -> bool:
    return t[0] == "const"


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


class TermBuilder:
    """Smart constructors that fold constants with W-bit semantics."""

    def __init__(self, width: int = 32):
        self.width = width
        self.half = 1 << (width - 1)
        self.mask = (1 << width) - 1

    def wrap(self, v: int) -> int:
        return ((v + self.half) & self.mask) - self.half

    def const(self, v: int):
        return ("const", self.wrap(v))

    def binop(self, op, a, b):
        if a[0] == "const" and b[0] == "const":
            x, y = a[1], b[1]
            if op in ("/", "%") and y == 0:
                return (op, a, b)
            return ("const", apply_op(op, x, y, self.wrap))
        if op in ("+", "-"):
            la, lb = self._linear(a), self._linear(b)
            return self._make_lin(la[0] + (lb[0] if op == "+" else -lb[0]),
                                  la[1], lb[1], 1 if op == "+" else -1)
        if op == "*":
            if a[0] == "const":
                a, b = b, a
            if b[0] == "const":
                la = self._linear(a)
                return self._make_lin(la[0] * b[1], (), la[1], b[1])
        if op == "&&":
            if a[0] == "const":
                return self.truth(b) if a[1] else ZERO
            if b[0] == "const" and b[1]:
                return self.truth(a)
        elif op == "||":
            if a[0] == "const":
                return ONE if a[1] else self.truth(b)
            if b[0] == "const" and not b[1]:
                return self.truth(a)
        return (op, a, b)

    def neg(self, a):
        la = self._linear(a)
        return self._make_lin(-la[0], (), la[1], -1)

    @staticmethod
    def _linear(t):
        head = t[0]
        if head == "const":
            return t[1], ()
        if head == "lin":
            return t[1], t[2]
        return 0, ((t, 1),)

    def _make_lin(self, k, left, right, scale):
        coeffs: dict = {}
        for atom, c in left:
            coeffs[atom] = c
        for atom, c in right:
            coeffs[atom] = coeffs.get(atom, 0) + scale * c
        items = tuple(sorted((atom, self.wrap(c)) for atom, c in coeffs.items() if self.wrap(c) != 0))
        k = self.wrap(k)
        if not items:
            return ("const", k)
        if k == 0 and len(items) == 1 and items[0][1] == 1:
            return items[0][0]
        return ("lin", k, items)

    def lnot(self, a):
        if a[0] == "const":
            return ZERO if a[1] else ONE
        if a[0] == "not":
            return self.truth(a[1])
        if a[0] in _NEG_CMP:
            return (_NEG_CMP[a[0]], a[1], a[2])
        return ("not", a)

    def truth(self, a):
        """0/1-valued term that is 1 exactly when ``a`` is non-zero."""
        if a[0] == "const":
            return ONE if a[1] else ZERO
        if a[0] in BOOLEAN_HEADS:
            return a
        return ("!=", a, ZERO)


def apply_op(op, x, y, wrap):
    if op == "+":
        return wrap(x + y)
    if op == "-":
        return wrap(x - y)
    if op == "*":
        return wrap(x * y)
    if op == "/":
        return wrap(trunc_div(x, y))
    if op == "%":
        return wrap(x - y * trunc_div(x, y))
    if op == "==":
        return 1 if x == y else 0
    if op == "!=":
        return 1 if x != y else 0
    if op == "<":
        return 1 if x < y else 0
    if op == "<=":
        return 1 if x <= y else 0
    if op == ">":
        return 1 if x > y else 0
    if op == ">=":
        return 1 if x >= y else 0
    if op == "&&":
        return 1 if (x and y) else 0
    if op == "||":
        return 1 if (x or y) else 0
    raise ValueError(op)


class DivisionByZero(Exception):
    pass


def evaluate(t, assignment, builder: TermBuilder, memo=None):
    """Concrete value of ``t`` under ``assignment`` (symbol index -> value)."""
    if memo is None:
        memo = {}
    key = id(t)
    hit = memo.get(key)
    if hit is not None and hit[0] is t:
        return hit[1]
    head = t[0]
    if head == "const":
        v = t[1]
    elif head == "sym":
        v = assignment.get(t[1], 0)
    elif head == "lin":
        v = t[1]
        for atom, c in t[2]:
            v += c * evaluate(atom, assignment, builder, memo)
        v = builder.wrap(v)
    elif head == "neg":
        v = builder.wrap(-evaluate(t[1], assignment, builder, memo))
    elif head == "not":
        v = 0 if evaluate(t[1], assignment, builder, memo) else 1
    elif head == "&&":
        v = 1 if evaluate(t[1], assignment, builder, memo) and evaluate(t[2], assignment, builder, memo) else 0
    elif head == "||":
        v = 1 if evaluate(t[1], assignment, builder, memo) or evaluate(t[2], assignment, builder, memo) else 0
    else:
        x = evaluate(t[1], assignment, builder, memo)
        y = evaluate(t[2], assignment, builder, memo)
        if head in ("/", "%") and y == 0:
            raise DivisionByZero()
        v = apply_op(head, x, y, builder.wrap)
    memo[key] = (t, v)
    return v


def symbols(t, out=None) -> set:
    if out is None:
        out = set()
    stack = [t]
    seen = set()
    while stack:
        u = stack.pop()
        if id(u) in seen:
            continue
        seen.add(id(u))
        if u[0] == "sym":
            out.add(u[1])
        elif u[0] == "lin":
            stack.extend(atom for atom, _c in u[2])
        elif u[0] != "const":
            stack.extend(u[1:])
    return out


def format_term(t) -> str:
    head = t[0]
    if head == "const":
        return str(t[1])
    if head == "sym":
        return f"x{t[1]}"
    if head == "lin":
        parts = [str(t[1])] if t[1] else []
        parts += [f"{c}*{format_term(a)}" if c != 1 else format_term(a) for a, c in t[2]]
        return "(" + " + ".join(parts) + ")"
    if head == "neg":
        return f"-({format_term(t[1])})"
    if head == "not":
        return f"!({format_term(t[1])})"
    return f"({format_term(t[1])} {head} {format_term(t[2])})"


def compile_check(constraints, builder: TermBuilder):
    """Compile a conjunction into ``f(*values) -> bool`` over its sorted symbols.

    Shared subterms are computed once and each conjunct is tested as soon as
    its value is known.  Division by zero yields 0 here instead of raising;
    callers confirm final models with :func:`evaluate`.
    Returns ``(f, symbol_order)``.
    """
    syms = sorted(set().union(*(symbols(c) for c in constraints))) if constraints else []
    names: dict = {}
    lines: list = []
    h, m = builder.half, builder.mask

    def w(expr):
        return f"((({expr}) + {h}) & {m}) - {h}"

    def emit(t):
        key = id(t)
        if key in names:
            return names[key][1]
        head = t[0]
        if head == "const":
            ref = repr(t[1])
        elif head == "sym":
            ref = f"x{t[1]}"
        else:
            if head == "lin":
                parts = [str(t[1])] + [f"{c}*{emit(a)}" for a, c in t[2]]
                expr = w(" + ".join(parts))
            elif head == "neg":
                expr = w(f"-{emit(t[1])}")
            elif head == "not":
                expr = f"0 if {emit(t[1])} else 1"
            else:
                a, b = emit(t[1]), emit(t[2])
                if head in ("+", "-", "*"):
                    expr = w(f"{a} {head} {b}")
                elif head == "/":
                    expr = f"0 if {b} == 0 else {w(f'_div({a}, {b})')}"
                elif head == "%":
                    expr = f"0 if {b} == 0 else {w(f'{a} - {b} * _div({a}, {b})')}"
                elif head == "&&":
                    expr = f"1 if ({a} and {b}) else 0"
                elif head == "||":
                    expr = f"1 if ({a} or {b}) else 0"
                else:
                    expr = f"1 if {a} {head} {b} else 0"
            ref = f"t{len(lines)}"
            lines.append(f"    {ref} = {expr}")
        names[key] = (t, ref)
        return ref

    for c in constraints:
        ref = emit(c)
        lines.append(f"    if not {ref}: return False")
    src = f"def _check({', '.join(f'x{s}' for s in syms)}):\n" + "\n".join(lines + ["    return True"])
    scope = {"_div": trunc_div}
    exec(compile(src, "<constraints>", "exec"), scope)
    return scope["_check"], syms
