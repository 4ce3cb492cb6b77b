"""Pretty-printer producing re-parseable MiniC text."""

from __future__ import annotations

from . import ast as A

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7


def format_expr(e, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(e, A.IntLit):
        text = str(e.value)
        # A negative literal is printed as unary minus; keep it atomic.
        return f"({text})" if e.value < 0 and parent_prec else text
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.NondetInt):
        return f"{A.NONDET_INT}()"
    if isinstance(e, A.NondetBool):
        return f"{A.NONDET_BOOL}()"
    if isinstance(e, A.CallExpr):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, A.UnOp):
        inner = format_expr(e.operand, _UNARY_PREC)
        nested_minus = e.op == "-" and inner.startswith("-")
        if (isinstance(e.operand, A.IntLit) or nested_minus) and not inner.startswith("("):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, A.BinOp):
        prec = _PREC[e.op]
        text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec, True)}"
        # Binary operators are left-associative: a right operand of equal
        # precedence needs parentheses to survive a round trip.
        if prec < parent_prec or (prec == parent_prec and right_side):
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {e!r}")


def _format_block(block: A.Block, indent: int, out: list) -> None:
    for s in block.stmts:
        _format_stmt(s, indent, out)


def _format_stmt(s, indent: int, out: list) -> None:
    pad = " " * indent
    if isinstance(s, A.Label):
        out.append(f"{pad}{s.name}:;")
    elif isinstance(s, A.Decl):
        init = f" = {format_expr(s.init)}" if s.init is not None else ""
        out.append(f"{pad}{s.type} {s.name}{init};")
    elif isinstance(s, A.Assign):
        out.append(f"{pad}{s.name} = {format_expr(s.value)};")
    elif isinstance(s, A.Return):
        out.append(f"{pad}return;" if s.value is None else f"{pad}return {format_expr(s.value)};")
    elif isinstance(s, A.Call):
        out.append(f"{pad}{format_expr(s.call)};")
    elif isinstance(s, A.AssertFail):
        out.append(f"{pad}{A.REACH_ERROR}();")
    elif isinstance(s, A.Block):
        out.append(f"{pad}{{")
        _format_block(s, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.If):
        out.append(f"{pad}if ({format_expr(s.cond)}) {{")
        _format_block(s.then, indent + 1, out)
        if s.orelse is None:
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}}} else {{")
            _format_block(s.orelse, indent + 1, out)
            out.append(f"{pad}}}")
    elif isinstance(s, A.While):
        out.append(f"{pad}while ({format_expr(s.cond)}) {{")
        _format_block(s.body, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def pretty_print(program: A.MiniCProgram) -> str:
    out = []
    for i, fn in enumerate(program.functions):
        if i:
            out.append("")
        params = ", ".join(f"{p.type} {p.name}" for p in fn.params)
        out.append(f"{fn.ret_type} {fn.name}({params}) {{")
        _format_block(fn.body, 1, out)
        out.append("}")
    return "\n".join(out) + "\n"
