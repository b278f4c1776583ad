#!/usr/bin/env python3
"""Regenerate the seed corpus under corpus/.

Each correct program ships with a test suite it passes; each buggy entry
is a one-span corruption of a correct program, keeps the same suite
(which it must fail), and records its reference fix. Statement counts in
the manifest are derived from the canonical text by counting
statement-opening lines, independent of the parser.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from jayfix.minilang import (  # noqa: E402
    SourceProgram,
    TestCase,
    TestSuite,
    parse,
    pretty_print,
    run_tests,
    typecheck,
)

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"

CORRECT: dict[str, tuple[str, list[dict]]] = {}


def program(name: str, text: str, cases: list[dict]) -> None:
    CORRECT[name] = (text, cases)


def case(id_: str, entry: str, args: list, expect) -> dict:
    return {"id": id_, "entry": entry, "args": args, "expect": expect}


program(
    "gcd",
    """\
fn gcd(a: int, b: int) -> int {
    while (b != 0) {
        let t: int = b;
        b = a % b;
        a = t;
    }
    return a;
}
""",
    [
        case("t1", "gcd", [12, 18], 6),
        case("t2", "gcd", [7, 3], 1),
        case("t3", "gcd", [0, 5], 5),
        case("t4", "gcd", [5, 0], 5),
        case("t5", "gcd", [48, 36], 12),
        case("t6", "gcd", [100, 75], 25),
    ],
)

program(
    "lcm",
    """\
fn gcd(a: int, b: int) -> int {
    while (b != 0) {
        let t: int = b;
        b = a % b;
        a = t;
    }
    return a;
}

fn lcm(a: int, b: int) -> int {
    return a / gcd(a, b) * b;
}
""",
    [
        case("t1", "lcm", [4, 6], 12),
        case("t2", "lcm", [3, 5], 15),
        case("t3", "lcm", [10, 10], 10),
        case("t4", "lcm", [2, 8], 8),
        case("t5", "lcm", [7, 3], 21),
    ],
)

program(
    "binary_search",
    """\
fn binary_search(xs: int[], target: int) -> int {
    let lo: int = 0;
    let hi: int = len(xs) - 1;
    while (lo <= hi) {
        let mid: int = (lo + hi) / 2;
        if (xs[mid] == target) {
            return mid;
        }
        if (xs[mid] < target) {
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return -1;
}
""",
    [
        case("t1", "binary_search", [[1, 3, 5, 7, 9], 5], 2),
        case("t2", "binary_search", [[1, 3, 5, 7, 9], 1], 0),
        case("t3", "binary_search", [[1, 3, 5, 7, 9], 9], 4),
        case("t4", "binary_search", [[1, 3, 5, 7, 9], 4], -1),
        case("t5", "binary_search", [[], 3], -1),
        case("t6", "binary_search", [[2], 2], 0),
    ],
)

program(
    "bubble_sort",
    """\
fn bubble_sort(xs: int[]) -> int[] {
    let n: int = len(xs);
    let i: int = 0;
    while (i < n) {
        let j: int = 0;
        while (j < n - 1 - i) {
            if (xs[j] > xs[j + 1]) {
                let t: int = xs[j];
                xs[j] = xs[j + 1];
                xs[j + 1] = t;
            }
            j = j + 1;
        }
        i = i + 1;
    }
    return xs;
}
""",
    [
        case("t1", "bubble_sort", [[3, 1, 2]], [1, 2, 3]),
        case("t2", "bubble_sort", [[]], []),
        case("t3", "bubble_sort", [[5]], [5]),
        case("t4", "bubble_sort", [[2, 2, 1]], [1, 2, 2]),
        case("t5", "bubble_sort", [[9, 8, 7, 6]], [6, 7, 8, 9]),
        case("t6", "bubble_sort", [[1, 2, 3]], [1, 2, 3]),
    ],
)

program(
    "max_subarray",
    """\
fn max_subarray(xs: int[]) -> int {
    if (len(xs) == 0) {
        return 0;
    }
    let best: int = xs[0];
    let current: int = xs[0];
    let i: int = 1;
    while (i < len(xs)) {
        if (current < 0) {
            current = xs[i];
        } else {
            current = current + xs[i];
        }
        if (best < current) {
            best = current;
        }
        i = i + 1;
    }
    return best;
}
""",
    [
        case("t1", "max_subarray", [[-2, 1, -3, 4, -1, 2, 1, -5, 4]], 6),
        case("t2", "max_subarray", [[1, 2, 3]], 6),
        case("t3", "max_subarray", [[-1, -2, -3]], -1),
        case("t4", "max_subarray", [[]], 0),
        case("t5", "max_subarray", [[5]], 5),
        case("t6", "max_subarray", [[-1, 5, -1]], 5),
    ],
)

program(
    "count_primes",
    """\
fn count_primes(n: int) -> int {
    if (n < 3) {
        return 0;
    }
    let sieve: int[] = zeros(n);
    let count: int = 0;
    let i: int = 2;
    while (i < n) {
        if (sieve[i] == 0) {
            count = count + 1;
            let j: int = i * i;
            while (j < n) {
                sieve[j] = 1;
                j = j + i;
            }
        }
        i = i + 1;
    }
    return count;
}
""",
    [
        case("t1", "count_primes", [10], 4),
        case("t2", "count_primes", [2], 0),
        case("t3", "count_primes", [3], 1),
        case("t4", "count_primes", [20], 8),
        case("t5", "count_primes", [100], 25),
        case("t6", "count_primes", [0], 0),
    ],
)

program(
    "fibonacci",
    """\
fn fibonacci(n: int) -> int {
    if (n <= 0) {
        return 0;
    }
    let a: int = 0;
    let b: int = 1;
    let i: int = 1;
    while (i < n) {
        let t: int = a + b;
        a = b;
        b = t;
        i = i + 1;
    }
    return b;
}
""",
    [
        case("t1", "fibonacci", [0], 0),
        case("t2", "fibonacci", [1], 1),
        case("t3", "fibonacci", [2], 1),
        case("t4", "fibonacci", [7], 13),
        case("t5", "fibonacci", [10], 55),
        case("t6", "fibonacci", [20], 6765),
    ],
)

program(
    "factorial",
    """\
fn factorial(n: int) -> int {
    let result: int = 1;
    let i: int = 2;
    while (i <= n) {
        result = result * i;
        i = i + 1;
    }
    return result;
}
""",
    [
        case("t1", "factorial", [0], 1),
        case("t2", "factorial", [1], 1),
        case("t3", "factorial", [5], 120),
        case("t4", "factorial", [7], 5040),
        case("t5", "factorial", [10], 3628800),
    ],
)

program(
    "int_power",
    """\
fn int_power(base: int, exp: int) -> int {
    let result: int = 1;
    let b: int = base;
    let e: int = exp;
    while (e > 0) {
        if (e % 2 == 1) {
            result = result * b;
        }
        b = b * b;
        e = e / 2;
    }
    return result;
}
""",
    [
        case("t1", "int_power", [2, 10], 1024),
        case("t2", "int_power", [3, 5], 243),
        case("t3", "int_power", [5, 0], 1),
        case("t4", "int_power", [1, 100], 1),
        case("t5", "int_power", [7, 3], 343),
    ],
)

program(
    "is_prime",
    """\
fn is_prime(n: int) -> bool {
    if (n < 2) {
        return false;
    }
    let d: int = 2;
    while (d * d <= n) {
        if (n % d == 0) {
            return false;
        }
        d = d + 1;
    }
    return true;
}
""",
    [
        case("t1", "is_prime", [1], False),
        case("t2", "is_prime", [2], True),
        case("t3", "is_prime", [9], False),
        case("t4", "is_prime", [13], True),
        case("t5", "is_prime", [25], False),
        case("t6", "is_prime", [97], True),
    ],
)

program(
    "array_max",
    """\
fn array_max(xs: int[]) -> int {
    let best: int = xs[0];
    let i: int = 1;
    while (i < len(xs)) {
        if (best < xs[i]) {
            best = xs[i];
        }
        i = i + 1;
    }
    return best;
}
""",
    [
        case("t1", "array_max", [[3, 1, 2]], 3),
        case("t2", "array_max", [[5]], 5),
        case("t3", "array_max", [[-3, -1, -2]], -1),
        case("t4", "array_max", [[1, 9, 9, 2]], 9),
        case("t5", "array_max", [[0, 0, 0]], 0),
    ],
)

program(
    "array_sum",
    """\
fn array_sum(xs: int[]) -> int {
    let total: int = 0;
    let i: int = 0;
    while (i < len(xs)) {
        total = total + xs[i];
        i = i + 1;
    }
    return total;
}
""",
    [
        case("t1", "array_sum", [[]], 0),
        case("t2", "array_sum", [[1, 2, 3]], 6),
        case("t3", "array_sum", [[-1, 1]], 0),
        case("t4", "array_sum", [[10]], 10),
        case("t5", "array_sum", [[2, 4, 6, 8]], 20),
    ],
)

program(
    "reverse_array",
    """\
fn reverse_array(xs: int[]) -> int[] {
    let n: int = len(xs);
    let out: int[] = zeros(n);
    let i: int = 0;
    while (i < n) {
        out[n - 1 - i] = xs[i];
        i = i + 1;
    }
    return out;
}
""",
    [
        case("t1", "reverse_array", [[1, 2, 3]], [3, 2, 1]),
        case("t2", "reverse_array", [[]], []),
        case("t3", "reverse_array", [[5]], [5]),
        case("t4", "reverse_array", [[1, 1, 2]], [2, 1, 1]),
        case("t5", "reverse_array", [[4, 3, 2, 1]], [1, 2, 3, 4]),
    ],
)

program(
    "linear_search",
    """\
fn linear_search(xs: int[], target: int) -> int {
    let i: int = 0;
    while (i < len(xs)) {
        if (xs[i] == target) {
            return i;
        }
        i = i + 1;
    }
    return -1;
}
""",
    [
        case("t1", "linear_search", [[4, 5, 6], 5], 1),
        case("t2", "linear_search", [[4, 5, 6], 7], -1),
        case("t3", "linear_search", [[], 1], -1),
        case("t4", "linear_search", [[3, 3], 3], 0),
        case("t5", "linear_search", [[9], 9], 0),
    ],
)

program(
    "array_min",
    """\
fn array_min(xs: int[]) -> int {
    let best: int = xs[0];
    let i: int = 1;
    while (i < len(xs)) {
        if (xs[i] < best) {
            best = xs[i];
        }
        i = i + 1;
    }
    return best;
}
""",
    [
        case("t1", "array_min", [[3, 1, 2]], 1),
        case("t2", "array_min", [[5]], 5),
        case("t3", "array_min", [[-3, -1]], -3),
        case("t4", "array_min", [[2, 2]], 2),
        case("t5", "array_min", [[9, 8, 10]], 8),
    ],
)

program(
    "abs_value",
    """\
fn abs_value(x: int) -> int {
    if (x < 0) {
        return -x;
    }
    return x;
}
""",
    [
        case("t1", "abs_value", [-5], 5),
        case("t2", "abs_value", [5], 5),
        case("t3", "abs_value", [0], 0),
        case("t4", "abs_value", [-1], 1),
        case("t5", "abs_value", [123], 123),
    ],
)

program(
    "count_evens",
    """\
fn count_evens(xs: int[]) -> int {
    let count: int = 0;
    let i: int = 0;
    while (i < len(xs)) {
        if (xs[i] % 2 == 0) {
            count = count + 1;
        }
        i = i + 1;
    }
    return count;
}
""",
    [
        case("t1", "count_evens", [[1, 2, 3, 4]], 2),
        case("t2", "count_evens", [[]], 0),
        case("t3", "count_evens", [[2, 4, 6]], 3),
        case("t4", "count_evens", [[1, 3]], 0),
        case("t5", "count_evens", [[0]], 1),
        case("t6", "count_evens", [[-2, 1]], 1),
    ],
)

program(
    "clamp",
    """\
fn max2(a: int, b: int) -> int {
    if (a > b) {
        return a;
    }
    return b;
}

fn min2(a: int, b: int) -> int {
    if (a < b) {
        return a;
    }
    return b;
}

fn clamp(x: int, lo: int, hi: int) -> int {
    return min2(max2(x, lo), hi);
}
""",
    [
        case("t1", "clamp", [5, 0, 10], 5),
        case("t2", "clamp", [-5, 0, 10], 0),
        case("t3", "clamp", [15, 0, 10], 10),
        case("t4", "clamp", [0, 0, 10], 0),
        case("t5", "clamp", [10, 0, 10], 10),
        case("t6", "max2", [3, 4], 4),
        case("t7", "min2", [3, 4], 3),
    ],
)

program(
    "digit_sum",
    """\
fn digit_sum(n: int) -> int {
    let m: int = n;
    if (m < 0) {
        m = -m;
    }
    let total: int = 0;
    while (m > 0) {
        total = total + m % 10;
        m = m / 10;
    }
    return total;
}
""",
    [
        case("t1", "digit_sum", [0], 0),
        case("t2", "digit_sum", [7], 7),
        case("t3", "digit_sum", [123], 6),
        case("t4", "digit_sum", [-45], 9),
        case("t5", "digit_sum", [99999], 45),
    ],
)

program(
    "dot_product",
    """\
fn dot_product(xs: int[], ys: int[]) -> int {
    let total: int = 0;
    let i: int = 0;
    while (i < len(xs)) {
        total = total + xs[i] * ys[i];
        i = i + 1;
    }
    return total;
}
""",
    [
        case("t1", "dot_product", [[1, 2], [3, 4]], 11),
        case("t2", "dot_product", [[], []], 0),
        case("t3", "dot_product", [[2], [5]], 10),
        case("t4", "dot_product", [[1, 0, 1], [7, 8, 9]], 16),
        case("t5", "dot_product", [[-1, 2], [4, 3]], 2),
    ],
)

# Buggy entries: (name, base name, original line, corrupted line).
BUGGY: list[tuple[str, str, str, str]] = [
    ("gcd_buggy", "gcd", "        b = a % b;", "        b = a + b;"),
    ("binary_search_buggy", "binary_search", "            lo = mid + 1;", "            lo = mid;"),
    ("bubble_sort_buggy", "bubble_sort", "            if (xs[j] > xs[j + 1]) {", "            if (xs[j] < xs[j + 1]) {"),
    ("max_subarray_buggy", "max_subarray", "    let best: int = xs[0];", "    let best: int = 0;"),
    ("fibonacci_buggy", "fibonacci", "    while (i < n) {", "    while (i <= n) {"),
    ("factorial_buggy", "factorial", "    let result: int = 1;", "    let result: int = 0;"),
    ("is_prime_buggy", "is_prime", "    while (d * d <= n) {", "    while (d * d < n) {"),
    ("array_sum_buggy", "array_sum", "    let i: int = 0;", "    let i: int = 1;"),
    ("clamp_buggy", "clamp", "    return min2(max2(x, lo), hi);", "    return min2(max2(x, hi), lo);"),
    ("digit_sum_buggy", "digit_sum", "        m = m / 10;", "        m = m / 100;"),
]

_STMT_PREFIXES = ("let ", "return ", "while (", "if (", "} else if (")


def count_statements(text: str) -> int:
    """Statement-opening lines in canonical text: let/assign/indexed
    assign/return/while/if headers, plus `} else if` headers."""
    count = 0
    for raw in text.split("\n"):
        line = raw.strip()
        if not line or line.startswith("fn ") or line in ("}", "} else {"):
            continue
        if line.startswith(_STMT_PREFIXES):
            count += 1
        elif line.endswith(";") and "=" in line and not line.startswith("let "):
            count += 1  # assignment or indexed assignment
    return count


def verify_correct(name: str, text: str, cases: list[dict]) -> None:
    ast = parse(text)
    diags = typecheck(ast)
    assert not diags, f"{name}: {diags}"
    assert pretty_print(ast) == text, f"{name}: not in canonical form"
    suite = TestSuite(
        tuple(TestCase(c["id"], c["entry"], tuple(_to_value(a) for a in c["args"]), _to_value(c["expect"])) for c in cases)
    )
    report = run_tests(ast, suite)
    assert report.all_pass, f"{name}: failing cases {report.outcomes}"
    assert len(cases) >= 5, f"{name}: needs >=5 cases"


def _to_value(v):
    return list(v) if isinstance(v, list) else v


def main() -> None:
    CORPUS_DIR.mkdir(exist_ok=True)
    manifest = []
    for name, (text, cases) in CORRECT.items():
        verify_correct(name, text, cases)
        (CORPUS_DIR / f"{name}.jay").write_text(text, encoding="utf-8")
        (CORPUS_DIR / f"{name}.tests.json").write_text(
            json.dumps(cases, indent=2) + "\n", encoding="utf-8"
        )
        manifest.append({"name": name, "status": "correct", "statements": count_statements(text)})

    for name, base, original, corrupted in BUGGY:
        base_text, cases = CORRECT[base]
        assert base_text.count(original + "\n") == 1, f"{name}: ambiguous original line"
        text = base_text.replace(original + "\n", corrupted + "\n")
        assert text != base_text
        ast = parse(text)
        assert not typecheck(ast), f"{name}: must typecheck"
        suite = TestSuite(
            tuple(TestCase(c["id"], c["entry"], tuple(_to_value(a) for a in c["args"]), _to_value(c["expect"])) for c in cases)
        )
        report = run_tests(ast, suite)
        assert report.any_failure, f"{name}: must fail at least one test"
        assert not report.all_pass
        (CORPUS_DIR / f"{name}.jay").write_text(text, encoding="utf-8")
        (CORPUS_DIR / f"{name}.tests.json").write_text(
            json.dumps(cases, indent=2) + "\n", encoding="utf-8"
        )
        manifest.append(
            {
                "name": name,
                "status": "buggy",
                "reference_fix": f"{base}.jay",
                "statements": count_statements(text),
            }
        )
        print(f"{name}: fails {sum(1 for _, o in report.outcomes if o.value != 'pass')} case(s)")

    (CORPUS_DIR / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(manifest)} entries to {CORPUS_DIR}")


if __name__ == "__main__":
    main()
