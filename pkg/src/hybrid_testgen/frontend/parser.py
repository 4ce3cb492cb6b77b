"""Lexer and recursive-descent parser for MiniC."""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast as A


class ParseError(Exception):
    """Base class for every positioned front-end diagnostic."""

    def __init__(self, message: str, line: int = 0, col: int = 0, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        super().__init__(self.__str__())

    def __str__(self):
        text = f"{self.line}:{self.col}: {self.message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        return text


class MiniCSyntaxError(ParseError):
    pass


class UnsupportedFeature(ParseError):
    pass


class SemanticError(ParseError):
    pass


@dataclass
class Token:
    kind: str  # "num", "id", "kw", "op", "eof"
    text: str
    line: int
    col: int


KEYWORDS = {"int", "bool", "_Bool", "void", "if", "else", "while", "return", "true", "false"}

# C constructs that are recognised only to be rejected with a clear message.
UNSUPPORTED_KEYWORDS = {
    "for": "for loops",
    "do": "do-while loops",
    "switch": "switch statements",
    "case": "switch statements",
    "goto": "goto",
    "break": "break",
    "continue": "continue",
    "struct": "structs",
    "union": "unions",
    "enum": "enums",
    "typedef": "typedef",
    "float": "floating point",
    "double": "floating point",
    "char": "char",
    "long": "long integers",
    "short": "short integers",
    "unsigned": "unsigned integers",
    "signed": "explicit signedness",
    "static": "storage classes",
    "const": "type qualifiers",
    "volatile": "type qualifiers",
    "sizeof": "sizeof",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<num>0[xX][0-9a-fA-F]+|[0-9]+)[uUlL]*
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|\+\+|--|->|\+=|-=|\*=|/=|%=|<<|>>|[-+*/%<>=!(){};,:&|^~?\[\].])
    """,
    re.VERBOSE | re.DOTALL,
)

_UNSUPPORTED_OPS = {
    "++": "increment operators",
    "--": "decrement operators",
    "->": "pointers",
    "+=": "compound assignment",
    "-=": "compound assignment",
    "*=": "compound assignment",
    "/=": "compound assignment",
    "%=": "compound assignment",
    "<<": "shift operators",
    ">>": "shift operators",
    "&": "pointers or bitwise operators",
    "|": "bitwise operators",
    "^": "bitwise operators",
    "~": "bitwise operators",
    "?": "the conditional operator",
    "[": "arrays",
    "]": "arrays",
    ".": "structs",
}


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        # Preprocessor directives are ignored whole-line.
        if source[pos] == "#" and source[line_start:pos].strip() == "":
            end = source.find("\n", pos)
            pos = n if end < 0 else end
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise MiniCSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group(kind)
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "bcomment":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rfind("\n") + 1
        elif kind == "num":
            tokens.append(Token("num", text, line, col))
        elif kind == "id":
            tokens.append(Token("kw" if text in KEYWORDS else "id", text, line, col))
        elif kind == "op":
            tokens.append(Token("op", text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]

_TYPE_WORDS = ("int", "bool", "_Bool", "void")


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"unexpected {self._describe(self.tok)}", expected=(repr(text),))
        return self.advance()

    def fail(self, message, expected=(), tok=None):
        tok = tok or self.tok
        self._reject_unsupported(tok)
        raise MiniCSyntaxError(message, tok.line, tok.col, expected)

    def _reject_unsupported(self, tok: Token):
        if tok.kind == "id" and tok.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(
                f"{UNSUPPORTED_KEYWORDS[tok.text]} are outside the MiniC subset", tok.line, tok.col
            )
        if tok.kind == "op" and tok.text in _UNSUPPORTED_OPS:
            raise UnsupportedFeature(
                f"{_UNSUPPORTED_OPS[tok.text]} are outside the MiniC subset", tok.line, tok.col
            )

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def expect_ident(self) -> Token:
        if self.tok.kind != "id":
            self.fail(f"unexpected {self._describe(self.tok)}", expected=("identifier",))
        return self.advance()

    def parse_type(self) -> str:
        t = self.tok
        self._reject_unsupported(t)
        if t.kind == "kw" and t.text in _TYPE_WORDS:
            self.advance()
            ty = "bool" if t.text == "_Bool" else t.text
            if self.at("*"):
                raise UnsupportedFeature("pointers are outside the MiniC subset", self.tok.line, self.tok.col)
            return ty
        self.fail(f"unexpected {self._describe(t)}", expected=("type",))

    # -- declarations --------------------------------------------------------

    def parse_program(self) -> A.MiniCProgram:
        functions = []
        while self.tok.kind != "eof":
            if self.tok.kind == "id" and self.tok.text == "extern":
                self.advance()
            fn = self.parse_function()
            if fn is not None:
                functions.append(fn)
        return A.MiniCProgram(functions)

    def parse_function(self):
        start = self.tok
        ret = self.parse_type()
        name = self.expect_ident()
        if not self.at("("):
            if self.at(";") or self.at("=") or self.at(","):
                raise UnsupportedFeature(
                    "global variables are outside the MiniC subset", name.line, name.col
                )
            self.fail(f"unexpected {self._describe(self.tok)}", expected=("'('",))
        self.expect("(")
        params = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        elif not self.at(")"):
            while True:
                pty = self.parse_type()
                if pty == A.VOID:
                    self.fail("parameter of type void", tok=self.tokens[self.i - 1])
                pname = self.expect_ident()
                params.append(A.Param(pty, pname.text))
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect(")")
        if self.at(";"):
            # Prototype; definitions carry everything we need.
            self.advance()
            return None
        body = self.parse_block()
        return A.FunctionDecl(ret, name.text, params, body, loc=(start.line, start.col))

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> A.Block:
        lb = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("unexpected end of input", expected=("'}'",))
            stmts.append(self.parse_stmt())
        self.expect("}")
        return A.Block(stmts, loc=(lb.line, lb.col))

    def parse_body(self) -> A.Block:
        if self.at("{"):
            return self.parse_block()
        t = self.tok
        return A.Block([self.parse_stmt()], loc=(t.line, t.col))

    def parse_stmt(self):
        t = self.tok
        self._reject_unsupported(t)
        loc = (t.line, t.col)
        if self.at("{"):
            return self.parse_block()
        if t.kind == "kw" and t.text in _TYPE_WORDS:
            ty = self.parse_type()
            if ty == A.VOID:
                self.fail("variable of type void", tok=t)
            name = self.expect_ident()
            init = None
            if self.at("="):
                self.advance()
                init = self.parse_expr()
            if self.at(","):
                raise UnsupportedFeature(
                    "multiple declarators are outside the MiniC subset", self.tok.line, self.tok.col
                )
            if self.at("["):
                self._reject_unsupported(self.tok)
            self.expect(";")
            return A.Decl(ty, name.text, init, loc=loc)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_body()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.parse_body()
            return A.If(cond, then, orelse, loc=loc)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return A.While(cond, self.parse_body(), loc=loc)
        if self.at("return"):
            self.advance()
            value = None
            if not self.at(";"):
                value = self.parse_expr()
            self.expect(";")
            return A.Return(value, loc=loc)
        if self.at(";"):
            self.advance()
            return A.Block([], loc=loc)
        if t.kind == "id":
            nxt = self.peek()
            if nxt.text == ":" and nxt.kind == "op":
                self.advance()
                self.advance()
                self.expect(";")
                return A.Label(t.text, loc=loc)
            if nxt.text == "=" and nxt.kind == "op":
                self.advance()
                self.advance()
                value = self.parse_expr()
                self.expect(";")
                return A.Assign(t.text, value, loc=loc)
            if nxt.text == "(" and nxt.kind == "op":
                call = self.parse_postfix()
                self.expect(";")
                if isinstance(call, A.CallExpr) and call.name == A.REACH_ERROR:
                    if call.args:
                        self.fail("reach_error takes no arguments", tok=t)
                    return A.AssertFail(loc=loc)
                if isinstance(call, A.CallExpr):
                    return A.Call(call, loc=loc)
            self.advance()
            self.fail(f"unexpected {self._describe(self.tok)}", expected=("'='", "'('", "':'"))
        self.fail(f"unexpected {self._describe(t)}", expected=("statement",))

    # -- expressions ---------------------------------------------------------

    def parse_expr(self, level=0):
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.advance()
            right = self.parse_expr(level + 1)
            left = A.BinOp(op.text, left, right, loc=(op.line, op.col))
        return left

    def parse_unary(self):
        t = self.tok
        if t.kind == "op" and t.text == "-" and self.peek().kind == "num":
            self.advance()
            lit = self.advance()
            return A.IntLit(-int(lit.text, 0), loc=(t.line, t.col))
        if t.kind == "op" and t.text in ("!", "-"):
            self.advance()
            return A.UnOp(t.text, self.parse_unary(), loc=(t.line, t.col))
        if t.kind == "op" and t.text == "+":
            self.advance()
            return self.parse_unary()
        if t.kind == "op" and t.text in ("*", "&"):
            raise UnsupportedFeature("pointers are outside the MiniC subset", t.line, t.col)
        return self.parse_postfix()

    def parse_postfix(self):
        t = self.tok
        self._reject_unsupported(t)
        loc = (t.line, t.col)
        if t.kind == "num":
            self.advance()
            return A.IntLit(int(t.text, 0), loc=loc)
        if t.kind == "kw" and t.text in ("true", "false"):
            self.advance()
            return A.BoolLit(t.text == "true", loc=loc)
        if self.at("("):
            self.advance()
            if self.tok.kind == "kw" and self.tok.text in _TYPE_WORDS:
                raise UnsupportedFeature("casts are outside the MiniC subset", self.tok.line, self.tok.col)
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "id":
            self.advance()
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at(","):
                            self.advance()
                            continue
                        break
                self.expect(")")
                if t.text == A.NONDET_INT:
                    if args:
                        self.fail("nondet reads take no arguments", tok=t)
                    return A.NondetInt(loc=loc)
                if t.text == A.NONDET_BOOL:
                    if args:
                        self.fail("nondet reads take no arguments", tok=t)
                    return A.NondetBool(loc=loc)
                return A.CallExpr(t.text, args, loc=loc)
            if self.at("["):
                self._reject_unsupported(self.tok)
            return A.Var(t.text, loc=loc)
        self.fail(f"unexpected {self._describe(t)}", expected=("expression",))


def parse(source: str) -> A.MiniCProgram:
    """Parse MiniC source text and check it against the subset's static rules."""
    program = Parser(source).parse_program()
    check_program(program)
    return program


# -- static checks -----------------------------------------------------------

_INTRINSICS = {A.NONDET_INT: A.INT, A.NONDET_BOOL: A.BOOL, A.REACH_ERROR: A.VOID}


def check_program(program: A.MiniCProgram) -> None:
    names = {}
    for fn in program.functions:
        if fn.name in names:
            raise SemanticError(f"function {fn.name!r} defined twice", *fn.loc)
        if fn.name in (A.NONDET_INT, A.NONDET_BOOL):
            raise SemanticError(f"{fn.name} is an intrinsic and cannot be defined", *fn.loc)
        names[fn.name] = fn
    if program.entry not in names:
        raise SemanticError(f"no {program.entry!r} function", 1, 1)
    rerr = names.get(A.REACH_ERROR)
    if rerr is not None and rerr.params:
        raise SemanticError("reach_error must take no parameters", *rerr.loc)
    for fn in program.functions:
        seen = set()
        for p in fn.params:
            if p.name in seen:
                raise SemanticError(f"duplicate parameter {p.name!r} in {fn.name!r}", *fn.loc)
            seen.add(p.name)
        _check_block(fn.body.stmts, [set(seen)], fn, names)


def _check_block(stmts, scopes, fn, names):
    scopes.append(set())
    try:
        for s in stmts:
            _check_stmt(s, scopes, fn, names)
    finally:
        scopes.pop()


def _check_stmt(s, scopes, fn, names):
    if isinstance(s, A.Block):
        _check_block(s.stmts, scopes, fn, names)
        return
    for e in A.stmt_exprs(s):
        _check_expr(e, scopes, fn, names, value_needed=not isinstance(s, A.Call))
    if isinstance(s, A.Decl):
        scopes[-1].add(s.name)
    elif isinstance(s, A.Assign):
        if not any(s.name in sc for sc in scopes):
            raise SemanticError(f"assignment to undeclared variable {s.name!r}", *s.loc)
    elif isinstance(s, A.Return):
        if fn.ret_type == A.VOID and s.value is not None:
            raise SemanticError(f"void function {fn.name!r} returns a value", *s.loc)
        if fn.ret_type != A.VOID and s.value is None:
            raise SemanticError(f"function {fn.name!r} must return a value", *s.loc)
    elif isinstance(s, A.If):
        _check_block(s.then.stmts, scopes, fn, names)
        if s.orelse is not None:
            _check_block(s.orelse.stmts, scopes, fn, names)
    elif isinstance(s, A.While):
        _check_block(s.body.stmts, scopes, fn, names)


def _check_expr(e, scopes, fn, names, value_needed=True):
    if isinstance(e, A.Var):
        if not any(e.name in sc for sc in scopes):
            raise SemanticError(f"use of undeclared variable {e.name!r}", *e.loc)
    elif isinstance(e, A.BinOp):
        _check_expr(e.left, scopes, fn, names)
        _check_expr(e.right, scopes, fn, names)
    elif isinstance(e, A.UnOp):
        _check_expr(e.operand, scopes, fn, names)
    elif isinstance(e, A.CallExpr):
        callee = names.get(e.name)
        if callee is None:
            if e.name == A.REACH_ERROR:
                raise SemanticError("reach_error() cannot be used as a value", *e.loc)
            raise SemanticError(f"call to undeclared function {e.name!r}", *e.loc)
        if len(callee.params) != len(e.args):
            raise SemanticError(
                f"{e.name!r} expects {len(callee.params)} arguments, got {len(e.args)}", *e.loc
            )
        if value_needed and callee.ret_type == A.VOID:
            raise SemanticError(f"void function {e.name!r} used as a value", *e.loc)
        for a in e.args:
            _check_expr(a, scopes, fn, names)
