"""MiniC front end: parsing, static checks and pretty-printing."""

from . import ast
from .parser import MiniCSyntaxError, ParseError, SemanticError, UnsupportedFeature, parse, tokenize
from .printer import format_expr, pretty_print

__all__ = [
    "ast",
    "MiniCSyntaxError",
    "ParseError",
    "SemanticError",
    "UnsupportedFeature",
    "format_expr",
    "parse",
    "pretty_print",
    "tokenize",
]
