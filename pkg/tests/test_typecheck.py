from __future__ import annotations

from jayfix.minilang import parse, typecheck


def diagnostics_of(src: str):
    return typecheck(parse(src))


def test_bool_returned_as_int():
    diags = diagnostics_of("fn f() -> int { return true; }")
    assert diags and diags[0].kind == "TypeError"


def test_unresolved_call():
    diags = diagnostics_of("fn f() -> int { return g(); }")
    assert any("g" in d.message for d in diags)


def test_corpus_programs_all_typecheck(corpus_entries):
    for entry in corpus_entries:
        assert typecheck(entry.ast) == [], entry.name


def test_missing_return_path():
    diags = diagnostics_of("fn f(x: int) -> int { if (x > 0) { return 1; } }")
    assert any("without returning" in d.message for d in diags)


def test_both_branches_return_is_ok():
    src = "fn f(x: int) -> int { if (x > 0) { return 1; } else { return 0; } }"
    assert diagnostics_of(src) == []


def test_while_does_not_guarantee_return():
    diags = diagnostics_of("fn f() -> int { while (true) { return 1; } }")
    assert diags


def test_condition_must_be_bool():
    assert diagnostics_of("fn f(x: int) -> int { if (x) { return 1; } return 0; }")


def test_shadowing_is_rejected():
    assert diagnostics_of(
        "fn f(x: int) -> int { let x: int = 1; return x; }"
    )


def test_diagnostics_sorted_by_span():
    src = (
        "fn f() -> int {\n"
        "    let a: int = true;\n"
        "    let b: int = false;\n"
        "    return a;\n"
        "}\n"
    )
    diags = diagnostics_of(src)
    assert len(diags) == 2
    assert [d.span.start_line for d in diags] == sorted(d.span.start_line for d in diags)


def test_arity_and_argument_types():
    src = (
        "fn g(a: int, b: int) -> int { return a + b; }\n"
        "fn f() -> int { return g(1); }\n"
    )
    assert any("argument" in d.message for d in diagnostics_of(src))
    src2 = (
        "fn g(a: int) -> int { return a; }\n"
        "fn f() -> int { return g(true); }\n"
    )
    assert any("must be int" in d.message for d in diagnostics_of(src2))


def test_builtins_are_reserved():
    assert diagnostics_of("fn len(x: int) -> int { return x; }")


def test_array_rules():
    assert diagnostics_of("fn f(a: int[]) -> int { return a[true]; }")
    assert diagnostics_of("fn f(a: int) -> int { return a[0]; }")
    assert diagnostics_of("fn f(a: int[]) -> bool { return a == a; }")
    assert diagnostics_of("fn f() -> int[] { return [1, true]; }")
    src_ok = "fn f(a: int[]) -> int { a[0] = len(a); return a[0]; }"
    assert diagnostics_of(src_ok) == []
