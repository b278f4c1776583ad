"""On-disk datasets: seed programs, train/validation splitting, and the
persistent sample store.

A corpus directory holds `<name>.jay` programs, sibling
`<name>.tests.json` suites, and a `manifest.json` array of
`{"name", "status": "correct"|"buggy", "reference_fix": optional path}`
entries. Loading re-runs the oracles and rejects entries that violate
their declared status, mirroring reproduction filtering: rejected
entries are reported, not fatal.

The sample store is an append-only, deduplicated JSONL file with a
version header and length-prefixed records, so a torn final write is
detected and ignored on load.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .minilang import (
    Ast,
    SourceProgram,
    Span,
    TestCase,
    TestSuite,
    analyze,
    run_tests,
    DEFAULT_FUEL,
)
from .util import content_hash, round_half_up

STATUS_CORRECT = "correct"
STATUS_BUGGY = "buggy"

DIRECTION_FIX = "fix"  # input: buggy region, target: correct region
DIRECTION_BREAK = "break"  # input: correct region, target: buggy region

ORIGIN_MECHANICAL = "mechanical"
ORIGIN_BACKTRANSLATION = "backtranslation"


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    program: SourceProgram
    suite: TestSuite
    status: str
    ast: Ast = field(compare=False)
    reference_fix: Optional[SourceProgram] = None

    @property
    def name(self) -> str:
        return self.program.name


@dataclass(frozen=True)
class RejectedEntry:
    name: str
    reason: str


def load_suite(path: Path) -> TestSuite:
    raw = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(raw, list) or not raw:
        raise CorpusError(f"{path.name}: suite must be a nonempty array")
    cases = []
    for item in raw:
        args = tuple(list(a) if isinstance(a, list) else a for a in item["args"])
        expect = item["expect"]
        expect = list(expect) if isinstance(expect, list) else expect
        cases.append(TestCase(str(item["id"]), str(item["entry"]), args, expect))
    return TestSuite(tuple(cases))


def load_corpus(
    directory: str | Path, fuel: int = DEFAULT_FUEL
) -> tuple[list[CorpusEntry], list[RejectedEntry]]:
    """Load every manifest entry, verifying its status invariant.

    Correct entries must typecheck and pass all tests; buggy entries must
    typecheck and fail at least one. A buggy entry's reference fix, when
    present, must pass all tests. Violations become rejection records.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        if directory.is_dir() and not list(directory.glob("*.jay")):
            return [], []  # genuinely empty directory
        raise CorpusError(f"no manifest.json in {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if not isinstance(manifest, list):
        raise CorpusError("manifest.json must be an array")

    entries: list[CorpusEntry] = []
    rejected: list[RejectedEntry] = []
    seen: set[str] = set()
    for item in manifest:
        name = item.get("name", "<unnamed>")
        try:
            if name in seen:
                raise CorpusError("duplicate name in manifest")
            seen.add(name)
            status = item["status"]
            if status not in (STATUS_CORRECT, STATUS_BUGGY):
                raise CorpusError(f"unknown status {status!r}")
            source_path = directory / f"{name}.jay"
            if not source_path.exists():
                raise CorpusError("missing .jay file")
            suite_path = directory / f"{name}.tests.json"
            if not suite_path.exists():
                raise CorpusError("missing .tests.json suite")
            program = SourceProgram(name, source_path.read_text(encoding="utf-8"))
            suite = load_suite(suite_path)
            ast, diagnostics = analyze(program)
            if ast is None or diagnostics:
                raise CorpusError(f"does not compile: {diagnostics[0]}")
            for case in suite.cases:
                if ast.function(case.entry) is None:
                    raise CorpusError(f"suite entry '{case.entry}' not in program")
            report = run_tests(ast, suite, fuel=fuel)
            if status == STATUS_CORRECT and not report.all_pass:
                raise CorpusError("marked correct but has failing tests")
            if status == STATUS_BUGGY and report.all_pass:
                raise CorpusError("marked buggy but passes all tests")
            reference: Optional[SourceProgram] = None
            if item.get("reference_fix"):
                ref_path = directory / item["reference_fix"]
                if not ref_path.exists():
                    raise CorpusError("missing reference fix file")
                reference = SourceProgram(name + ".fix", ref_path.read_text(encoding="utf-8"))
                ref_ast, ref_diags = analyze(reference)
                if ref_ast is None or ref_diags:
                    raise CorpusError("reference fix does not compile")
                if not run_tests(ref_ast, suite, fuel=fuel).all_pass:
                    raise CorpusError("reference fix fails tests")
            entries.append(CorpusEntry(program, suite, status, ast, reference))
        except (CorpusError, json.JSONDecodeError, KeyError, ValueError) as err:
            rejected.append(RejectedEntry(name, str(err)))
    return entries, rejected


def correct_entries(entries: Iterable[CorpusEntry]) -> list[CorpusEntry]:
    return [e for e in entries if e.status == STATUS_CORRECT]


def buggy_entries(entries: Iterable[CorpusEntry]) -> list[CorpusEntry]:
    return [e for e in entries if e.status == STATUS_BUGGY]


# --- training samples ------------------------------------------------------


@dataclass(frozen=True)
class TrainingSample:
    direction: str  # fix | break
    input_tokens: tuple[int, ...]
    target_tokens: tuple[int, ...]
    origin: str  # mechanical | backtranslation
    iteration: int  # 0 for mechanical, >=1 for backtranslation
    source_program: str
    span: Span

    def __post_init__(self) -> None:
        if self.direction not in (DIRECTION_FIX, DIRECTION_BREAK):
            raise ValueError(f"bad direction {self.direction!r}")
        if not self.input_tokens or not self.target_tokens:
            raise ValueError("token sequences must be nonempty")
        if self.origin == ORIGIN_BACKTRANSLATION and self.iteration < 1:
            raise ValueError("back-translation samples need iteration >= 1")

    def content_key(self) -> str:
        return content_hash(
            [self.direction, list(self.input_tokens), list(self.target_tokens)]
        )

    def to_json(self) -> dict:
        return {
            "direction": self.direction,
            "input_tokens": list(self.input_tokens),
            "target_tokens": list(self.target_tokens),
            "origin": self.origin,
            "iteration": self.iteration,
            "source_program": self.source_program,
            "span": [self.span.start_line, self.span.end_line],
        }

    @staticmethod
    def from_json(raw: dict) -> "TrainingSample":
        return TrainingSample(
            direction=raw["direction"],
            input_tokens=tuple(raw["input_tokens"]),
            target_tokens=tuple(raw["target_tokens"]),
            origin=raw["origin"],
            iteration=int(raw["iteration"]),
            source_program=raw["source_program"],
            span=Span(raw["span"][0], raw["span"][1]),
        )


def split_holdout(
    samples: list[TrainingSample], fraction: float, seed: int
) -> tuple[list[TrainingSample], list[TrainingSample]]:
    """Deterministic disjoint (train, validation) split.

    Validation gets round(fraction * N) samples, at least one. Rounding
    is half-up so the split does not depend on banker's rounding.
    """
    if not samples:
        raise ValueError("cannot split an empty sample list")
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    n_val = max(1, round_half_up(fraction * len(samples)))
    if n_val >= len(samples):
        n_val = max(1, len(samples) - 1)
    order = np.random.default_rng(seed).permutation(len(samples))
    val_idx = set(order[:n_val].tolist())
    train = [s for i, s in enumerate(samples) if i not in val_idx]
    validation = [s for i, s in enumerate(samples) if i in val_idx]
    return train, validation


# --- persistent sample store -------------------------------------------------

STORE_FORMAT = 1


class SampleStore:
    """Append-only deduplicated store, persisted as header + length-prefixed
    JSON lines (`<byte length>\\t<json>`). One writer, many readers."""

    def __init__(self, path: str | Path, vocab_sha: str | None = None):
        self.path = Path(path)
        self.samples: list[TrainingSample] = []
        self._keys: set[str] = set()
        self.vocab_sha = vocab_sha
        if self.path.exists():
            self._load()
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            header = {"format": STORE_FORMAT}
            if vocab_sha:
                header["vocab_sha"] = vocab_sha
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(header) + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        if not lines or not lines[0]:
            raise CorpusError(f"{self.path}: empty store file")
        header = json.loads(lines[0])
        if header.get("format") != STORE_FORMAT:
            raise CorpusError(f"{self.path}: unsupported store format {header.get('format')}")
        stored_sha = header.get("vocab_sha")
        if self.vocab_sha is not None and stored_sha is not None and stored_sha != self.vocab_sha:
            raise CorpusError(f"{self.path}: store was built with a different vocabulary")
        if stored_sha is not None:
            self.vocab_sha = stored_sha
        for line in lines[1:]:
            if not line:
                continue
            try:
                prefix, payload = line.split("\t", 1)
                if int(prefix) != len(payload.encode("utf-8")):
                    break  # torn tail write: ignore from here on
                sample = TrainingSample.from_json(json.loads(payload))
            except (ValueError, KeyError, json.JSONDecodeError):
                break
            key = sample.content_key()
            if key not in self._keys:
                self._keys.add(key)
                self.samples.append(sample)

    def __len__(self) -> int:
        return len(self.samples)

    def __contains__(self, sample: TrainingSample) -> bool:
        return sample.content_key() in self._keys

    def append(self, batch: Iterable[TrainingSample]) -> int:
        """Add new samples, skipping content duplicates. The batch is
        persisted (flushed and fsynced) before returning."""
        fresh: list[TrainingSample] = []
        for sample in batch:
            key = sample.content_key()
            if key in self._keys:
                continue
            self._keys.add(key)
            fresh.append(sample)
        if fresh:
            with open(self.path, "a", encoding="utf-8") as fh:
                for sample in fresh:
                    payload = json.dumps(sample.to_json(), sort_keys=True)
                    fh.write(f"{len(payload.encode('utf-8'))}\t{payload}\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.samples.extend(fresh)
        return len(fresh)

    def samples_for(
        self, direction: str, include_mechanical: bool = True
    ) -> list[TrainingSample]:
        out = []
        for sample in self.samples:
            if sample.direction != direction:
                continue
            if not include_mechanical and sample.origin == ORIGIN_MECHANICAL:
                continue
            out.append(sample)
        return out

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for sample in self.samples:
            key = f"{sample.direction}/{sample.origin}"
            out[key] = out.get(key, 0) + 1
        out["total"] = len(self.samples)
        return out
