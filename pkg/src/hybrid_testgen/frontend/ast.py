"""AST node types for MiniC.

Source positions are carried on every node but excluded from equality, so two
programs compare equal when they have the same structure regardless of layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

INT = "int"
BOOL = "bool"
VOID = "void"

NONDET_INT = "__VERIFIER_nondet_int"
NONDET_BOOL = "__VERIFIER_nondet_bool"
REACH_ERROR = "reach_error"

ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("&&", "||")


def _loc():
    return field(default=(0, 0), compare=False, repr=False)


# -- expressions -------------------------------------------------------------


@dataclass
class IntLit:
    value: int
    loc: tuple = _loc()


@dataclass
class BoolLit:
    value: bool
    loc: tuple = _loc()


@dataclass
class Var:
    name: str
    loc: tuple = _loc()


@dataclass
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    loc: tuple = _loc()


@dataclass
class UnOp:
    op: str  # "!" or "-"
    operand: "Expr"
    loc: tuple = _loc()


@dataclass
class NondetInt:
    loc: tuple = _loc()


@dataclass
class NondetBool:
    loc: tuple = _loc()


@dataclass
class CallExpr:
    name: str
    args: list
    loc: tuple = _loc()


Expr = Union[IntLit, BoolLit, Var, BinOp, UnOp, NondetInt, NondetBool, CallExpr]


# -- statements --------------------------------------------------------------


@dataclass
class Block:
    stmts: list
    loc: tuple = _loc()


@dataclass
class Decl:
    type: str
    name: str
    init: Optional[Expr] = None
    loc: tuple = _loc()


@dataclass
class Assign:
    name: str
    value: Expr
    loc: tuple = _loc()


@dataclass
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block] = None
    loc: tuple = _loc()


@dataclass
class While:
    cond: Expr
    body: Block
    loc: tuple = _loc()


@dataclass
class Return:
    value: Optional[Expr] = None
    loc: tuple = _loc()


@dataclass
class Call:
    """A call used as a statement; the result, if any, is discarded."""

    call: CallExpr
    loc: tuple = _loc()


@dataclass
class AssertFail:
    """``reach_error();`` -- the error location."""

    loc: tuple = _loc()


@dataclass
class Label:
    """A no-op label statement such as ``GOAL_3:;``."""

    name: str
    loc: tuple = _loc()

    @property
    def goal_id(self) -> Optional[int]:
        if self.name.startswith("GOAL_") and self.name[5:].isdigit():
            return int(self.name[5:])
        return None


Stmt = Union[Block, Decl, Assign, If, While, Return, Call, AssertFail, Label]


# -- declarations ------------------------------------------------------------


@dataclass
class Param:
    type: str
    name: str


@dataclass
class FunctionDecl:
    ret_type: str
    name: str
    params: list
    body: Block
    loc: tuple = _loc()


@dataclass
class MiniCProgram:
    functions: list
    entry: str = "main"

    def function(self, name: str) -> Optional[FunctionDecl]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None

    @property
    def main(self) -> FunctionDecl:
        fn = self.function(self.entry)
        assert fn is not None
        return fn


def walk_stmts(stmts):
    """Yield every statement in ``stmts`` in pre-order, descending into blocks."""
    for s in stmts:
        yield s
        if isinstance(s, Block):
            yield from walk_stmts(s.stmts)
        elif isinstance(s, If):
            yield from walk_stmts(s.then.stmts)
            if s.orelse is not None:
                yield from walk_stmts(s.orelse.stmts)
        elif isinstance(s, While):
            yield from walk_stmts(s.body.stmts)


def walk_expr(e):
    yield e
    if isinstance(e, BinOp):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, UnOp):
        yield from walk_expr(e.operand)
    elif isinstance(e, CallExpr):
        for a in e.args:
            yield from walk_expr(a)


def stmt_exprs(s):
    """Top-level expressions directly owned by statement ``s``."""
    if isinstance(s, Decl):
        return [s.init] if s.init is not None else []
    if isinstance(s, Assign):
        return [s.value]
    if isinstance(s, (If, While)):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, Call):
        return [s.call]
    return []
