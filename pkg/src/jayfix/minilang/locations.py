"""Statement-location enumeration and line-span splicing.

Spans are inclusive 1-based line ranges. Splicing replaces a span's
lines with replacement lines; an empty replacement extends the edited
region by the following line on both sides of the edit so that regions
stay non-empty and the edit remains invertible (replacing the mutant
region with the original region's lines restores the base text).
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Ast, Span, walk_statements


def enumerate_statement_locations(ast: Ast) -> list[Span]:
    """Spans of every statement inside any function body, source order.

    Nested statements are enumerated individually; an if/while statement
    contributes its own (multi-line) span plus one span per inner
    statement.
    """
    spans: list[Span] = []
    for fn in ast.functions:
        for stmt in walk_statements(fn.body):
            spans.append(stmt.span)
    return spans


@dataclass(frozen=True)
class SpliceResult:
    mutant_text: str
    base_region: Span
    base_region_lines: tuple[str, ...]
    mutant_region: Span
    mutant_region_lines: tuple[str, ...]


def splice(text: str, span: Span, replacement_lines: list[str]) -> str:
    """Replace `span`'s lines with `replacement_lines`."""
    lines = text.split("\n")
    if span.end_line > len(lines):
        raise ValueError(f"span {span} outside file of {len(lines)} lines")
    new_lines = lines[: span.start_line - 1] + list(replacement_lines) + lines[span.end_line :]
    return "\n".join(new_lines)


def splice_region(text: str, span: Span, replacement_lines: list[str]) -> SpliceResult:
    """Apply an edit and report the paired base/mutant regions.

    For a non-empty replacement the base region is `span` itself and the
    mutant region covers the replacement lines. For an empty replacement
    (pure deletion) both regions absorb the line following `span`, which
    always exists because statements live inside brace-delimited blocks.
    """
    lines = text.split("\n")
    if span.end_line > len(lines):
        raise ValueError(f"span {span} outside file of {len(lines)} lines")
    replacement = list(replacement_lines)
    base_region = span
    if not replacement:
        if span.end_line >= len(lines):
            raise ValueError(f"cannot delete span {span}: no following line to anchor the edit")
        base_region = Span(span.start_line, span.end_line + 1)
        replacement = [lines[span.end_line]]  # the line after the deleted span
    base_region_lines = tuple(lines[base_region.start_line - 1 : base_region.end_line])
    mutant_text = splice(text, base_region, replacement)
    mutant_region = Span(base_region.start_line, base_region.start_line + len(replacement) - 1)
    return SpliceResult(
        mutant_text=mutant_text,
        base_region=base_region,
        base_region_lines=base_region_lines,
        mutant_region=mutant_region,
        mutant_region_lines=tuple(replacement),
    )


def region_text(text: str, span: Span) -> str:
    lines = text.split("\n")
    if span.end_line > len(lines):
        raise ValueError(f"span {span} outside file of {len(lines)} lines")
    return "\n".join(lines[span.start_line - 1 : span.end_line])


def line_indent(text: str, line_number: int) -> str:
    line = text.split("\n")[line_number - 1]
    return line[: len(line) - len(line.lstrip(" "))]
