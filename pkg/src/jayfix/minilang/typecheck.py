"""Static checks for Jay programs.

"Compilation" for Jay means parse + typecheck. The checker validates
name resolution, expression types, call signatures, and that every
control-flow path ends in a return. It accumulates one diagnostic per
violation and reports them sorted by span.
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
    Diagnostic,
    Expr,
    FunctionDecl,
    If,
    Index,
    IntLit,
    Let,
    Return,
    Span,
    Unary,
    Var,
    While,
    INT,
    BOOL,
    INT_ARRAY,
)

# Builtin signatures: name -> (param types, return type)
BUILTINS: dict[str, tuple[tuple[str, ...], str]] = {
    "len": ((INT_ARRAY,), INT),
    "zeros": ((INT,), INT_ARRAY),
}

_ARITH_OPS = ("+", "-", "*", "/", "%")
_REL_OPS = ("<", "<=", ">", ">=")
_EQ_OPS = ("==", "!=")
_LOGIC_OPS = ("&&", "||")

_ERROR = "<error>"  # poisoned type, suppresses cascading diagnostics


class _Scope:
    def __init__(self, parent: "_Scope | None" = None):
        self.parent = parent
        self.names: dict[str, str] = {}

    def lookup(self, name: str) -> str | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None

    def declare(self, name: str, type_: str) -> None:
        self.names[name] = type_


class _Checker:
    def __init__(self, ast: Ast):
        self.ast = ast
        self.diagnostics: list[Diagnostic] = []
        self.signatures: dict[str, tuple[tuple[str, ...], str]] = {}

    def error(self, span: Span, message: str) -> None:
        self.diagnostics.append(Diagnostic("TypeError", span, message))

    def run(self) -> list[Diagnostic]:
        for fn in self.ast.functions:
            if fn.name in BUILTINS:
                self.error(fn.span, f"function name '{fn.name}' is reserved")
            elif fn.name in self.signatures:
                self.error(fn.span, f"duplicate function '{fn.name}'")
            else:
                self.signatures[fn.name] = (tuple(p.type for p in fn.params), fn.return_type)
        for fn in self.ast.functions:
            self.check_function(fn)
        self.diagnostics.sort(key=lambda d: (d.span.start_line, d.span.end_line, d.message))
        return self.diagnostics

    def check_function(self, fn: FunctionDecl) -> None:
        scope = _Scope()
        seen: set[str] = set()
        for param in fn.params:
            if param.name in seen:
                self.error(fn.span, f"duplicate parameter '{param.name}' in '{fn.name}'")
            seen.add(param.name)
            scope.declare(param.name, param.type)
        self.check_block(fn.body, scope, fn)
        if not self.block_returns(fn.body):
            self.error(fn.span, f"function '{fn.name}' may finish without returning")

    def check_block(self, block: Block, scope: _Scope, fn: FunctionDecl) -> None:
        inner = _Scope(scope)
        for stmt in block.statements:
            self.check_statement(stmt, inner, fn)

    def check_statement(self, stmt, scope: _Scope, fn: FunctionDecl) -> None:
        if isinstance(stmt, Let):
            value_type = self.check_expression(stmt.value, scope)
            if scope.lookup(stmt.name) is not None:
                self.error(stmt.span, f"variable '{stmt.name}' already declared")
            elif value_type not in (stmt.type, _ERROR):
                self.error(stmt.span, f"cannot initialize {stmt.type} '{stmt.name}' with {value_type}")
            scope.declare(stmt.name, stmt.type)
        elif isinstance(stmt, Assign):
            value_type = self.check_expression(stmt.value, scope)
            declared = scope.lookup(stmt.name)
            if declared is None:
                self.error(stmt.span, f"assignment to undeclared variable '{stmt.name}'")
            elif value_type not in (declared, _ERROR):
                self.error(stmt.span, f"cannot assign {value_type} to {declared} '{stmt.name}'")
        elif isinstance(stmt, AssignIndex):
            index_type = self.check_expression(stmt.index, scope)
            value_type = self.check_expression(stmt.value, scope)
            declared = scope.lookup(stmt.name)
            if declared is None:
                self.error(stmt.span, f"assignment to undeclared variable '{stmt.name}'")
            elif declared != INT_ARRAY:
                self.error(stmt.span, f"cannot index {declared} '{stmt.name}'")
            if index_type not in (INT, _ERROR):
                self.error(stmt.span, f"array index must be int, not {index_type}")
            if value_type not in (INT, _ERROR):
                self.error(stmt.span, f"array element must be int, not {value_type}")
        elif isinstance(stmt, If):
            cond_type = self.check_expression(stmt.cond, scope)
            if cond_type not in (BOOL, _ERROR):
                self.error(stmt.span, f"if condition must be bool, not {cond_type}")
            self.check_block(stmt.then_block, scope, fn)
            if isinstance(stmt.else_branch, Block):
                self.check_block(stmt.else_branch, scope, fn)
            elif isinstance(stmt.else_branch, If):
                self.check_statement(stmt.else_branch, scope, fn)
        elif isinstance(stmt, While):
            cond_type = self.check_expression(stmt.cond, scope)
            if cond_type not in (BOOL, _ERROR):
                self.error(stmt.span, f"while condition must be bool, not {cond_type}")
            self.check_block(stmt.body, scope, fn)
        elif isinstance(stmt, Return):
            value_type = self.check_expression(stmt.value, scope)
            if value_type not in (fn.return_type, _ERROR):
                self.error(stmt.span, f"'{fn.name}' must return {fn.return_type}, not {value_type}")
        else:  # pragma: no cover - parser produces no other statements
            raise AssertionError(f"unknown statement {stmt!r}")

    def check_expression(self, expr: Expr, scope: _Scope) -> str:
        if isinstance(expr, IntLit):
            return INT
        if isinstance(expr, BoolLit):
            return BOOL
        if isinstance(expr, Var):
            declared = scope.lookup(expr.name)
            if declared is None:
                self.error(expr.span, f"unresolved name '{expr.name}'")
                return _ERROR
            return declared
        if isinstance(expr, ArrayLit):
            for item in expr.items:
                item_type = self.check_expression(item, scope)
                if item_type not in (INT, _ERROR):
                    self.error(item.span, f"array elements must be int, not {item_type}")
            return INT_ARRAY
        if isinstance(expr, Unary):
            operand = self.check_expression(expr.operand, scope)
            if expr.op == "-":
                if operand not in (INT, _ERROR):
                    self.error(expr.span, f"unary '-' needs int, not {operand}")
                return INT
            if operand not in (BOOL, _ERROR):
                self.error(expr.span, f"'!' needs bool, not {operand}")
            return BOOL
        if isinstance(expr, Binary):
            left = self.check_expression(expr.left, scope)
            right = self.check_expression(expr.right, scope)
            if _ERROR in (left, right):
                return INT if expr.op in _ARITH_OPS else BOOL
            if expr.op in _ARITH_OPS:
                if left != INT or right != INT:
                    self.error(expr.span, f"'{expr.op}' needs int operands, not {left} and {right}")
                return INT
            if expr.op in _REL_OPS:
                if left != INT or right != INT:
                    self.error(expr.span, f"'{expr.op}' needs int operands, not {left} and {right}")
                return BOOL
            if expr.op in _EQ_OPS:
                if left != right or left == INT_ARRAY:
                    self.error(expr.span, f"'{expr.op}' cannot compare {left} and {right}")
                return BOOL
            if expr.op in _LOGIC_OPS:
                if left != BOOL or right != BOOL:
                    self.error(expr.span, f"'{expr.op}' needs bool operands, not {left} and {right}")
                return BOOL
            raise AssertionError(f"unknown operator {expr.op}")  # pragma: no cover
        if isinstance(expr, Call):
            arg_types = [self.check_expression(arg, scope) for arg in expr.args]
            signature = BUILTINS.get(expr.func) or self.signatures.get(expr.func)
            if signature is None:
                self.error(expr.span, f"unresolved name '{expr.func}'")
                return _ERROR
            param_types, return_type = signature
            if len(arg_types) != len(param_types):
                self.error(
                    expr.span,
                    f"'{expr.func}' takes {len(param_types)} argument(s), got {len(arg_types)}",
                )
            else:
                for k, (got, want) in enumerate(zip(arg_types, param_types)):
                    if got not in (want, _ERROR):
                        self.error(expr.span, f"argument {k + 1} of '{expr.func}' must be {want}, not {got}")
            return return_type
        if isinstance(expr, Index):
            base = self.check_expression(expr.base, scope)
            index = self.check_expression(expr.index, scope)
            if base not in (INT_ARRAY, _ERROR):
                self.error(expr.span, f"cannot index {base}")
            if index not in (INT, _ERROR):
                self.error(expr.span, f"array index must be int, not {index}")
            return INT
        raise AssertionError(f"unknown expression {expr!r}")  # pragma: no cover

    def block_returns(self, block: Block) -> bool:
        return any(self.statement_returns(stmt) for stmt in block.statements)

    def statement_returns(self, stmt) -> bool:
        if isinstance(stmt, Return):
            return True
        if isinstance(stmt, If) and stmt.else_branch is not None:
            then_ok = self.block_returns(stmt.then_block)
            if isinstance(stmt.else_branch, Block):
                return then_ok and self.block_returns(stmt.else_branch)
            return then_ok and self.statement_returns(stmt.else_branch)
        return False


def typecheck(ast: Ast) -> list[Diagnostic]:
    """Empty list means the program is well-typed."""
    return _Checker(ast).run()
