"""Repair inference and the evaluation harness.

Tasks come with perfect fault localization: the true buggy span is
given to the fixer, which beam-decodes K replacement regions; each is
spliced into the program and assessed on three nested levels:

  compiles  - parses and typechecks,
  plausible - compiles and passes the whole human-written suite,
  correct   - plausible and normalized-AST-equal to the reference fix.

Normalized AST equality is a stricter stand-in for manual semantic
judgment; plausible-but-not-equal candidates are surfaced separately
for optional human review. Reports state their compilability
denominator explicitly (all generated candidates over all tasks).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .corpus import CorpusEntry, buggy_entries
from .mechanical import MechanicalBug
from .minilang import (
    Ast,
    DEFAULT_FUEL,
    SourceProgram,
    Span,
    analyze,
    ast_equal_normalized,
    run_tests,
    splice_region,
    TestSuite,
)
from .model import BeamScorer, Seq2SeqModel, beam_search
from .representation import RegionTooLong, RepresentationConfig, Vocabulary, build_input


@dataclass(frozen=True)
class RepairTask:
    name: str
    buggy: SourceProgram
    suite: TestSuite
    fault_span: Span
    reference: SourceProgram
    reference_ast: Ast = field(compare=False)


def derive_fault_region(buggy_text: str, fixed_text: str) -> tuple[Span, list[str]]:
    """Contiguous differing line block between a buggy program and its
    fix: the span to replace in the buggy text plus the replacement
    lines. Pure insertions/deletions absorb an unchanged neighbor line
    so the span and the replacement are both non-empty."""
    if buggy_text == fixed_text:
        raise ValueError("programs are identical; no fault region")
    buggy = buggy_text.split("\n")
    fixed = fixed_text.split("\n")
    top = 0
    while top < len(buggy) and top < len(fixed) and buggy[top] == fixed[top]:
        top += 1
    bottom = 0
    while (
        bottom < len(buggy) - top
        and bottom < len(fixed) - top
        and buggy[len(buggy) - 1 - bottom] == fixed[len(fixed) - 1 - bottom]
    ):
        bottom += 1
    buggy_block = buggy[top : len(buggy) - bottom]
    replacement = fixed[top : len(fixed) - bottom]
    if buggy_block and replacement:
        return Span(top + 1, len(buggy) - bottom), replacement
    if not buggy_block:
        # insertion: anchor the span on the unchanged neighbor line
        if top < len(buggy):
            return Span(top + 1, top + 1), replacement + [buggy[top]]
        return Span(top, top), [buggy[top - 1]] + replacement
    # deletion: absorb the following line, or the preceding one at EOF
    end = len(buggy) - bottom
    if end < len(buggy):
        return Span(top + 1, end + 1), [buggy[end]]
    return Span(top, end), [buggy[top - 1]]


def tasks_from_corpus(entries: Sequence[CorpusEntry]) -> list["RepairTask"]:
    """Repair tasks for every buggy entry that records a reference fix."""
    tasks = []
    for entry in buggy_entries(entries):
        if entry.reference_fix is None:
            continue
        span, _replacement = derive_fault_region(entry.program.text, entry.reference_fix.text)
        ref_ast, diags = analyze(entry.reference_fix)
        if ref_ast is None or diags:
            continue
        tasks.append(
            RepairTask(
                name=entry.name,
                buggy=entry.program,
                suite=entry.suite,
                fault_span=span,
                reference=entry.reference_fix,
                reference_ast=ref_ast,
            )
        )
    return tasks


def tasks_from_mechanical_bugs(
    bugs: Sequence[MechanicalBug], entries: Sequence[CorpusEntry]
) -> list[RepairTask]:
    """Held-out evaluation tasks built from mechanical corruptions of
    correct seeds; the base program is the reference fix."""
    by_name = {entry.name: entry for entry in entries}
    tasks = []
    for bug in bugs:
        base = by_name[bug.base_name]
        tasks.append(
            RepairTask(
                name=f"{bug.base_name}#{bug.rule_id}@{bug.anchor_span}",
                buggy=bug.mutant,
                suite=base.suite,
                fault_span=bug.mutant_region,
                reference=base.program,
                reference_ast=base.ast,
            )
        )
    return tasks


@dataclass(frozen=True)
class CandidatePatch:
    rank: int
    log_prob: float
    region_text: str
    program: SourceProgram


@dataclass(frozen=True)
class PatchAssessment:
    rank: int
    compiles: bool
    plausible: bool
    correct: bool

    def __post_init__(self) -> None:
        if self.correct and not self.plausible:
            raise ValueError("correct implies plausible")
        if self.plausible and not self.compiles:
            raise ValueError("plausible implies compiles")

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "compiles": self.compiles,
            "plausible": self.plausible,
            "correct": self.correct,
        }


def repair(
    fixer: Seq2SeqModel,
    task: RepairTask,
    k: int,
    rep_cfg: RepresentationConfig,
    vocab: Vocabulary,
) -> list[CandidatePatch]:
    """Up to K candidate programs: the buggy program with its fault span
    replaced by each beam-decoded region, in beam order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    input_tokens = build_input(task.buggy, task.fault_span, rep_cfg, vocab)
    scorer = BeamScorer(fixer, input_tokens)
    candidates = beam_search(scorer, k=k, max_len=fixer.config.max_tgt_len)
    patches = []
    for candidate in candidates:
        text = vocab.decode(list(candidate.content_tokens))
        result = splice_region(task.buggy.text, task.fault_span, text.split("\n"))
        patches.append(
            CandidatePatch(
                rank=candidate.rank,
                log_prob=candidate.log_prob,
                region_text=text,
                program=SourceProgram(f"{task.name}@rank{candidate.rank}", result.mutant_text),
            )
        )
    return patches


def assess(
    candidates: Sequence[CandidatePatch],
    task: RepairTask,
    fuel: int = DEFAULT_FUEL,
) -> list[PatchAssessment]:
    """Nested compiles/plausible/correct verdicts per candidate."""
    out = []
    for candidate in candidates:
        ast, diagnostics = analyze(candidate.program)
        compiles = ast is not None and not diagnostics
        plausible = False
        correct = False
        if compiles:
            plausible = run_tests(ast, task.suite, fuel=fuel).all_pass
            if plausible:
                correct = ast_equal_normalized(ast, task.reference_ast)
        out.append(
            PatchAssessment(rank=candidate.rank, compiles=compiles, plausible=plausible, correct=correct)
        )
    return out


@dataclass
class TaskResult:
    task: str
    assessments: list[PatchAssessment]
    first_correct_rank: Optional[int]
    first_plausible_rank: Optional[int]

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "assessments": [a.to_json() for a in self.assessments],
            "first_correct_rank": self.first_correct_rank,
            "first_plausible_rank": self.first_plausible_rank,
        }


@dataclass
class EvalReport:
    k: int
    task_results: list[TaskResult]
    correct_total: int
    plausible_total: int
    candidates_generated: int
    candidates_compiling: int
    curve: list[int]  # curve[r-1] = tasks whose first correct rank <= r
    review_queue: list[dict] = field(default_factory=list)

    @property
    def compilability_percent(self) -> float:
        if self.candidates_generated == 0:
            return 0.0
        return 100.0 * self.candidates_compiling / self.candidates_generated

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "totals": {
                "tasks": len(self.task_results),
                "correct": self.correct_total,
                "plausible": self.plausible_total,
            },
            "compilability": {
                "compiling_candidates": self.candidates_compiling,
                "generated_candidates": self.candidates_generated,
                "percent": self.compilability_percent,
            },
            "curve": self.curve,
            "tasks": [t.to_json() for t in self.task_results],
            "review_queue": self.review_queue,
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank", "cumulative_correct"])
            for rank, value in enumerate(self.curve, start=1):
                writer.writerow([rank, value])


def evaluate(
    fixer: Seq2SeqModel,
    tasks: Sequence[RepairTask],
    k: int,
    rep_cfg: RepresentationConfig,
    vocab: Vocabulary,
    fuel: int = DEFAULT_FUEL,
    collect_review_texts: bool = False,
) -> EvalReport:
    """Run repair + assessment over every task and aggregate totals,
    the cumulative-correct-by-rank curve, and patch compilability."""
    if not tasks:
        raise ValueError("no tasks to evaluate")
    task_results: list[TaskResult] = []
    generated = 0
    compiling = 0
    review: list[dict] = []
    for task in tasks:
        try:
            candidates = repair(fixer, task, k, rep_cfg, vocab)
        except RegionTooLong:
            candidates = []
        assessments = assess(candidates, task, fuel=fuel)
        generated += len(candidates)
        compiling += sum(1 for a in assessments if a.compiles)
        first_correct = next((a.rank for a in assessments if a.correct), None)
        first_plausible = next((a.rank for a in assessments if a.plausible), None)
        for candidate, assessment in zip(candidates, assessments):
            if assessment.plausible and not assessment.correct:
                entry = {"task": task.name, "rank": assessment.rank}
                if collect_review_texts:
                    entry["program"] = candidate.program.text
                review.append(entry)
        task_results.append(
            TaskResult(
                task=task.name,
                assessments=assessments,
                first_correct_rank=first_correct,
                first_plausible_rank=first_plausible,
            )
        )
    curve = []
    for rank in range(1, k + 1):
        curve.append(
            sum(
                1
                for t in task_results
                if t.first_correct_rank is not None and t.first_correct_rank <= rank
            )
        )
    report = EvalReport(
        k=k,
        task_results=task_results,
        correct_total=sum(1 for t in task_results if t.first_correct_rank is not None),
        plausible_total=sum(1 for t in task_results if t.first_plausible_rank is not None),
        candidates_generated=generated,
        candidates_compiling=compiling,
        curve=curve,
        review_queue=review,
    )
    assert report.correct_total <= report.plausible_total <= len(task_results)
    assert all(b >= a for a, b in zip(report.curve, report.curve[1:]))
    assert (report.curve[-1] if report.curve else 0) == report.correct_total
    return report
