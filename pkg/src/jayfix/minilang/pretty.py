"""Canonical formatter for Jay ASTs.

Output style: four-space indentation, one statement per line, `} else {`
cuddling, a blank line between functions, trailing newline. Parentheses
are emitted only where precedence requires them, so parse(pretty(ast))
is normalized-equal to ast.
"""

from __future__ import annotations

from .ast import (
    ArrayLit,
    Assign,
    AssignIndex,
    Ast,
    Binary,
    Block,
    BoolLit,
    Call,
    Expr,
    FunctionDecl,
    If,
    Index,
    IntLit,
    Let,
    Return,
    Unary,
    Var,
    While,
)

INDENT = "    "

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY_PRECEDENCE = 7


def format_expression(expr: Expr) -> str:
    return _format(expr, 0)


def _format(expr: Expr, parent_prec: int, right_side: bool = False) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, ArrayLit):
        return "[" + ", ".join(_format(item, 0) for item in expr.items) + "]"
    if isinstance(expr, Call):
        return expr.func + "(" + ", ".join(_format(arg, 0) for arg in expr.args) + ")"
    if isinstance(expr, Index):
        base = _format(expr.base, _UNARY_PRECEDENCE + 1)
        return f"{base}[{_format(expr.index, 0)}]"
    if isinstance(expr, Unary):
        if isinstance(expr.operand, (IntLit, BoolLit, Var, Call, Index, ArrayLit)):
            return expr.op + _format(expr.operand, _UNARY_PRECEDENCE)
        return f"{expr.op}({_format(expr.operand, 0)})"
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        left = _format(expr.left, prec, right_side=False)
        right = _format(expr.right, prec, right_side=True)
        text = f"{left} {expr.op} {right}"
        # Parenthesize when this node binds looser than its context, or when
        # it sits on the right of an equal-precedence operator (left-assoc).
        if prec < parent_prec or (prec == parent_prec and right_side):
            return f"({text})"
        return text
    raise AssertionError(f"unknown expression {expr!r}")  # pragma: no cover


def format_statement(stmt, indent: int = 0) -> list[str]:
    """Render one statement as canonical lines at the given indent depth."""
    pad = INDENT * indent
    if isinstance(stmt, Let):
        return [f"{pad}let {stmt.name}: {stmt.type} = {format_expression(stmt.value)};"]
    if isinstance(stmt, Assign):
        return [f"{pad}{stmt.name} = {format_expression(stmt.value)};"]
    if isinstance(stmt, AssignIndex):
        return [
            f"{pad}{stmt.name}[{format_expression(stmt.index)}] = {format_expression(stmt.value)};"
        ]
    if isinstance(stmt, Return):
        return [f"{pad}return {format_expression(stmt.value)};"]
    if isinstance(stmt, While):
        lines = [f"{pad}while ({format_expression(stmt.cond)}) {{"]
        lines.extend(_format_block_body(stmt.body, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, If):
        lines = [f"{pad}if ({format_expression(stmt.cond)}) {{"]
        lines.extend(_format_block_body(stmt.then_block, indent + 1))
        branch = stmt.else_branch
        while isinstance(branch, If):
            lines.append(f"{pad}}} else if ({format_expression(branch.cond)}) {{")
            lines.extend(_format_block_body(branch.then_block, indent + 1))
            branch = branch.else_branch
        if isinstance(branch, Block):
            lines.append(f"{pad}}} else {{")
            lines.extend(_format_block_body(branch, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise AssertionError(f"unknown statement {stmt!r}")  # pragma: no cover


def _format_block_body(block: Block, indent: int) -> list[str]:
    lines: list[str] = []
    for stmt in block.statements:
        lines.extend(format_statement(stmt, indent))
    return lines


def format_function(fn: FunctionDecl) -> list[str]:
    params = ", ".join(f"{p.name}: {p.type}" for p in fn.params)
    lines = [f"fn {fn.name}({params}) -> {fn.return_type} {{"]
    lines.extend(_format_block_body(fn.body, 1))
    lines.append("}")
    return lines


def pretty_print(ast: Ast) -> str:
    """Canonical source text for the program (ends with a newline)."""
    chunks: list[str] = []
    for fn in ast.functions:
        chunks.append("\n".join(format_function(fn)))
    return "\n\n".join(chunks) + "\n"
