"""The Jay mini-language: parsing, type checking, interpretation,
pretty-printing, statement locations, and normalized AST equality.

All operations are pure functions of their inputs and safe to call
concurrently.
"""

from __future__ import annotations

import sys

from .ast import (
    Ast,
    Diagnostic,
    MiniLangError,
    SourceProgram,
    Span,
    ast_equal_normalized,
    walk_expressions,
    walk_statements,
    BOOL,
    INT,
    INT_ARRAY,
)
from .interp import (
    CaseOutcome,
    DEFAULT_FUEL,
    ExecResult,
    ExecStatus,
    TestCase,
    TestReport,
    TestSuite,
    interpret,
    run_tests,
    values_equal,
)
from .locations import (
    SpliceResult,
    enumerate_statement_locations,
    line_indent,
    region_text,
    splice,
    splice_region,
)
from .parser import parse, try_parse
from .pretty import format_expression, format_statement, pretty_print
from .typecheck import BUILTINS, typecheck

# Deep-but-bounded recursion (nested expressions, call chains) must not
# crash the host process before the language-level limits kick in: the
# parser caps expression depth and the interpreter caps call depth, and
# this limit gives their recursive walks the headroom they need.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 5_000))


def analyze(source: SourceProgram | str) -> tuple[Ast | None, list[Diagnostic]]:
    """Parse + typecheck. Returns (ast, []) when the program "compiles",
    otherwise (None or ast, diagnostics)."""
    ast, parse_diag = try_parse(source)
    if ast is None:
        assert parse_diag is not None
        return None, [parse_diag]
    return ast, typecheck(ast)


def compiles(source: SourceProgram | str) -> bool:
    ast, diagnostics = analyze(source)
    return ast is not None and not diagnostics


__all__ = [
    "Ast",
    "BOOL",
    "BUILTINS",
    "CaseOutcome",
    "DEFAULT_FUEL",
    "Diagnostic",
    "ExecResult",
    "ExecStatus",
    "INT",
    "INT_ARRAY",
    "MiniLangError",
    "SourceProgram",
    "Span",
    "SpliceResult",
    "TestCase",
    "TestReport",
    "TestSuite",
    "analyze",
    "ast_equal_normalized",
    "compiles",
    "enumerate_statement_locations",
    "format_expression",
    "format_statement",
    "interpret",
    "line_indent",
    "parse",
    "pretty_print",
    "region_text",
    "run_tests",
    "splice",
    "splice_region",
    "try_parse",
    "typecheck",
    "values_equal",
    "walk_expressions",
    "walk_statements",
]
