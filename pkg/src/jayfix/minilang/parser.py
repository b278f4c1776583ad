"""Recursive-descent parser for the Jay mini-language.

Grammar (statements are the mutation/repair granularity):

    program   := fn_decl* EOF
    fn_decl   := "fn" IDENT "(" [param ("," param)*] ")" "->" type block
    param     := IDENT ":" type
    type      := "int" ["[" "]"] | "bool"
    block     := "{" stmt* "}"
    stmt      := "let" IDENT ":" type "=" expr ";"
               | IDENT ["[" expr "]"] "=" expr ";"
               | "if" "(" expr ")" block ["else" (if_stmt | block)]
               | "while" "(" expr ")" block
               | "return" expr ";"

Expressions use conventional precedence: || < && < ==/!= < relational
< additive < multiplicative < unary < postfix indexing. Parentheses
group but leave no trace in the AST.

The parser stops at the first error and reports a single diagnostic.
"""

from __future__ import annotations

from typing import Union

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
    MiniLangError,
    Param,
    Return,
    SourceProgram,
    Span,
    Stmt,
    Unary,
    Var,
    While,
    INT,
    BOOL,
    INT_ARRAY,
)
from .lexer import Token, tokenize


MAX_EXPR_DEPTH = 200


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "eof":
            self.pos += 1
        return tok

    def at(self, type_: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.type == type_ and (value is None or tok.value == value)

    def fail(self, message: str, tok: Token | None = None) -> MiniLangError:
        tok = tok or self.peek()
        shown = tok.value if tok.type != "eof" else "end of input"
        return MiniLangError(
            Diagnostic("ParseError", Span(tok.line, tok.line), f"{message}, got {shown!r}")
        )

    def expect(self, type_: str, value: str | None = None) -> Token:
        if not self.at(type_, value):
            want = value if value is not None else type_
            raise self.fail(f"expected {want!r}")
        return self.advance()

    # --- declarations ---

    def parse_program(self) -> Ast:
        functions: list[FunctionDecl] = []
        while not self.at("eof"):
            functions.append(self.parse_function())
        return Ast(tuple(functions))

    def parse_function(self) -> FunctionDecl:
        start = self.expect("kw", "fn")
        name = self.expect("ident").value
        self.expect("op", "(")
        params: list[Param] = []
        if not self.at("op", ")"):
            while True:
                pname = self.expect("ident").value
                self.expect("op", ":")
                params.append(Param(pname, self.parse_type()))
                if self.at("op", ","):
                    self.advance()
                    continue
                break
        self.expect("op", ")")
        self.expect("op", "->")
        return_type = self.parse_type()
        body = self.parse_block()
        span = Span(start.line, body.span.end_line)
        return FunctionDecl(name, tuple(params), return_type, body, span)

    def parse_type(self) -> str:
        tok = self.peek()
        if self.at("kw", "int"):
            self.advance()
            if self.at("op", "["):
                self.advance()
                self.expect("op", "]")
                return INT_ARRAY
            return INT
        if self.at("kw", "bool"):
            self.advance()
            return BOOL
        raise self.fail("expected a type ('int', 'int[]' or 'bool')", tok)

    def parse_block(self) -> Block:
        start = self.expect("op", "{")
        statements: list[Stmt] = []
        while not self.at("op", "}"):
            if self.at("eof"):
                raise self.fail("unterminated block")
            statements.append(self.parse_statement())
        end = self.expect("op", "}")
        return Block(tuple(statements), Span(start.line, end.line))

    # --- statements ---

    def parse_statement(self) -> Stmt:
        if self.at("kw", "let"):
            return self.parse_let()
        if self.at("kw", "if"):
            return self.parse_if()
        if self.at("kw", "while"):
            return self.parse_while()
        if self.at("kw", "return"):
            return self.parse_return()
        if self.at("ident"):
            return self.parse_assignment()
        raise self.fail("expected a statement")

    def parse_let(self) -> Let:
        start = self.expect("kw", "let")
        name = self.expect("ident").value
        self.expect("op", ":")
        type_ = self.parse_type()
        self.expect("op", "=")
        value = self.parse_expression()
        end = self.expect("op", ";")
        return Let(name, type_, value, Span(start.line, end.line))

    def parse_assignment(self) -> Union[Assign, AssignIndex]:
        name_tok = self.expect("ident")
        if self.at("op", "["):
            self.advance()
            index = self.parse_expression()
            self.expect("op", "]")
            self.expect("op", "=")
            value = self.parse_expression()
            end = self.expect("op", ";")
            return AssignIndex(name_tok.value, index, value, Span(name_tok.line, end.line))
        self.expect("op", "=")
        value = self.parse_expression()
        end = self.expect("op", ";")
        return Assign(name_tok.value, value, Span(name_tok.line, end.line))

    def parse_if(self) -> If:
        start = self.expect("kw", "if")
        self.expect("op", "(")
        cond = self.parse_expression()
        self.expect("op", ")")
        then_block = self.parse_block()
        else_branch: Union[Block, If, None] = None
        end_line = then_block.span.end_line
        if self.at("kw", "else"):
            self.advance()
            if self.at("kw", "if"):
                else_branch = self.parse_if()
            else:
                else_branch = self.parse_block()
            end_line = else_branch.span.end_line
        return If(cond, then_block, else_branch, Span(start.line, end_line))

    def parse_while(self) -> While:
        start = self.expect("kw", "while")
        self.expect("op", "(")
        cond = self.parse_expression()
        self.expect("op", ")")
        body = self.parse_block()
        return While(cond, body, Span(start.line, body.span.end_line))

    def parse_return(self) -> Return:
        start = self.expect("kw", "return")
        value = self.parse_expression()
        end = self.expect("op", ";")
        return Return(value, Span(start.line, end.line))

    # --- expressions ---

    def parse_expression(self) -> Expr:
        self.depth += 1
        if self.depth > MAX_EXPR_DEPTH:
            raise self.fail("expression nesting too deep")
        try:
            return self.parse_or()
        finally:
            self.depth -= 1

    def _binary_chain(self, sub, ops: tuple[str, ...]) -> Expr:
        left = sub()
        while self.peek().type == "op" and self.peek().value in ops:
            op = self.advance().value
            right = sub()
            left = Binary(op, left, right, Span(left.span.start_line, right.span.end_line))
        return left

    def parse_or(self) -> Expr:
        return self._binary_chain(self.parse_and, ("||",))

    def parse_and(self) -> Expr:
        return self._binary_chain(self.parse_equality, ("&&",))

    def parse_equality(self) -> Expr:
        return self._binary_chain(self.parse_relational, ("==", "!="))

    def parse_relational(self) -> Expr:
        return self._binary_chain(self.parse_additive, ("<", "<=", ">", ">="))

    def parse_additive(self) -> Expr:
        return self._binary_chain(self.parse_multiplicative, ("+", "-"))

    def parse_multiplicative(self) -> Expr:
        return self._binary_chain(self.parse_unary, ("*", "/", "%"))

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.type == "op" and tok.value in ("-", "!"):
            self.depth += 1
            if self.depth > MAX_EXPR_DEPTH:
                raise self.fail("expression nesting too deep")
            try:
                self.advance()
                operand = self.parse_unary()
            finally:
                self.depth -= 1
            return Unary(tok.value, operand, Span(tok.line, operand.span.end_line))
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while self.at("op", "["):
            self.advance()
            index = self.parse_expression()
            end = self.expect("op", "]")
            expr = Index(expr, index, Span(expr.span.start_line, end.line))
        return expr

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.type == "number":
            self.advance()
            return IntLit(int(tok.value), Span(tok.line, tok.line))
        if self.at("kw", "true") or self.at("kw", "false"):
            self.advance()
            return BoolLit(tok.value == "true", Span(tok.line, tok.line))
        if tok.type == "ident":
            self.advance()
            if self.at("op", "("):
                self.advance()
                args: list[Expr] = []
                if not self.at("op", ")"):
                    while True:
                        args.append(self.parse_expression())
                        if self.at("op", ","):
                            self.advance()
                            continue
                        break
                end = self.expect("op", ")")
                return Call(tok.value, tuple(args), Span(tok.line, end.line))
            return Var(tok.value, Span(tok.line, tok.line))
        if self.at("op", "("):
            self.advance()
            expr = self.parse_expression()
            self.expect("op", ")")
            return expr
        if self.at("op", "["):
            start = self.advance()
            items: list[Expr] = []
            if not self.at("op", "]"):
                while True:
                    items.append(self.parse_expression())
                    if self.at("op", ","):
                        self.advance()
                        continue
                    break
            end = self.expect("op", "]")
            return ArrayLit(tuple(items), Span(start.line, end.line))
        raise self.fail("expected an expression")


def parse(source: SourceProgram | str) -> Ast:
    """Parse a program, raising MiniLangError with the first diagnostic."""
    text = source.text if isinstance(source, SourceProgram) else source
    try:
        return _Parser(tokenize(text)).parse_program()
    except RecursionError:
        raise MiniLangError(
            Diagnostic("ParseError", Span(1, 1), "expression nesting too deep")
        ) from None


def try_parse(source: SourceProgram | str) -> tuple[Ast | None, Diagnostic | None]:
    """Non-raising variant: (ast, None) on success, (None, diagnostic) on failure."""
    try:
        return parse(source), None
    except MiniLangError as err:
        return None, err.diagnostic
