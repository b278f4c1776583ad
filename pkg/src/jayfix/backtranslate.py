"""The back-translation loop: alternating generate -> filter ->
accumulate -> fine-tune rounds that improve the breaker and fixer.

One iteration runs two half-rounds. The fixer half: the fixer proposes
K_correct patches per buggy seed (the seed buggy corpus plus bugs
accepted in earlier rounds), proposals identical to their input are
discarded, the correct-code critic filters the rest, survivors become
break-direction samples (fixed code in, buggy code out) in the store,
and the breaker is fine-tuned on every break sample in the store. The
breaker half mirrors it: K_buggy corruptions per statement location of
each correct seed, the buggy-code critic, fix-direction samples, and a
fixer fine-tune. Accepted corruptions join the buggy seed pool.

The default order runs the fixer half first; `order="breaker-first"`
swaps the halves, in which case bugs accepted by the breaker half feed
the fixer half of the same iteration. Fine-tuning always warm-starts
from the current weights and uses the whole store for its direction,
so later iterations see strictly more data. A half whose critic accepts
nothing skips its fine-tune and is logged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .corpus import (
    CorpusEntry,
    DIRECTION_BREAK,
    DIRECTION_FIX,
    ORIGIN_BACKTRANSLATION,
    SampleStore,
    TrainingSample,
    buggy_entries,
    correct_entries,
    split_holdout,
)
from .critics import CriticKind, POLARITY_BUGGY, POLARITY_CORRECT, filter_candidates
from .minilang import (
    DEFAULT_FUEL,
    SourceProgram,
    Span,
    enumerate_statement_locations,
    splice_region,
)
from .model import BeamScorer, Seq2SeqModel, TrainConfig, beam_search, save_checkpoint, train
from .representation import (
    RegionTooLong,
    RepresentationConfig,
    Vocabulary,
    build_input,
    encode_target,
)
from .util import content_hash, derive_rng, derive_seed

HOLDOUT_FRACTION = 0.02

ORDER_FIXER_FIRST = "fixer-first"
ORDER_BREAKER_FIRST = "breaker-first"


@dataclass(frozen=True)
class LoopConfig:
    iterations: int = 2
    k_correct: int = 10
    k_buggy: int = 1
    critic_family: str = "compiler"
    fuel: int = DEFAULT_FUEL
    seed: int = 0
    include_mechanical: bool = True
    max_locations_per_program: Optional[int] = None
    order: str = ORDER_FIXER_FIRST
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.iterations < 1 or self.k_correct < 1 or self.k_buggy < 1:
            raise ValueError("iterations, k_correct and k_buggy must be >= 1")
        if self.order not in (ORDER_FIXER_FIRST, ORDER_BREAKER_FIRST):
            raise ValueError(f"unknown order {self.order!r}")

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "k_correct": self.k_correct,
            "k_buggy": self.k_buggy,
            "critic_family": self.critic_family,
            "fuel": self.fuel,
            "seed": self.seed,
            "include_mechanical": self.include_mechanical,
            "max_locations_per_program": self.max_locations_per_program,
            "order": self.order,
            "jobs": self.jobs,
        }


@dataclass(frozen=True)
class BugSeed:
    """A buggy program awaiting repair proposals: the fixer's input."""

    program: SourceProgram
    region: Span
    base_name: str  # owning corpus program; supplies the critic suite


@dataclass
class CandidateRecord:
    text: str
    accepted: bool
    content_sha: str


@dataclass
class BatchLog:
    phase: str  # "fix_candidates" | "bug_candidates"
    base_name: str
    candidates: list[CandidateRecord] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "phase": self.phase,
            "base_name": self.base_name,
            "candidates": [
                {"text": c.text, "accepted": c.accepted, "sha": c.content_sha}
                for c in self.candidates
            ],
        }


@dataclass
class IterationLog:
    iteration: int
    critic_family: str
    order: str = ORDER_FIXER_FIRST
    fix_candidates: int = 0
    fix_kept: int = 0
    break_samples_appended: int = 0
    bug_candidates: int = 0
    bug_kept: int = 0
    fix_samples_appended: int = 0
    rejected_length: int = 0
    breaker_val_loss: Optional[float] = None
    fixer_val_loss: Optional[float] = None
    breaker_finetuned: bool = False
    fixer_finetuned: bool = False
    store_total_after: int = 0
    wall_clock_sec: float = 0.0
    batches: list[BatchLog] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "critic_family": self.critic_family,
            "order": self.order,
            "fix_candidates": self.fix_candidates,
            "fix_kept": self.fix_kept,
            "break_samples_appended": self.break_samples_appended,
            "bug_candidates": self.bug_candidates,
            "bug_kept": self.bug_kept,
            "fix_samples_appended": self.fix_samples_appended,
            "rejected_length": self.rejected_length,
            "breaker_val_loss": self.breaker_val_loss,
            "fixer_val_loss": self.fixer_val_loss,
            "breaker_finetuned": self.breaker_finetuned,
            "fixer_finetuned": self.fixer_finetuned,
            "store_total_after": self.store_total_after,
            "wall_clock_sec": self.wall_clock_sec,
            "batches": [b.to_json() for b in self.batches],
        }


def propose_regions(
    model: Seq2SeqModel,
    program: SourceProgram,
    region: Span,
    k: int,
    rep_cfg: RepresentationConfig,
    vocab: Vocabulary,
) -> list[tuple[str, float]]:
    """Beam-decode k replacement texts for one marked region."""
    input_tokens = build_input(program, region, rep_cfg, vocab)
    scorer = BeamScorer(model, input_tokens)
    candidates = beam_search(scorer, k=k, max_len=model.config.max_tgt_len)
    return [(vocab.decode(list(c.content_tokens)), c.log_prob) for c in candidates]


def initial_bug_seeds(entries: list[CorpusEntry]) -> list[BugSeed]:
    """Seed the fixer side with the buggy corpus; the fault region is
    recovered by diffing each entry against its reference fix."""
    from .evaluate import derive_fault_region

    seeds = []
    for entry in buggy_entries(entries):
        if entry.reference_fix is None:
            continue
        span, _ = derive_fault_region(entry.program.text, entry.reference_fix.text)
        seeds.append(BugSeed(program=entry.program, region=span, base_name=entry.name))
    return seeds


def _sample_from_edit(
    direction: str,
    program: SourceProgram,
    region: Span,
    target_lines: tuple[str, ...],
    base_name: str,
    iteration: int,
    rep_cfg: RepresentationConfig,
    vocab: Vocabulary,
    log: IterationLog,
) -> Optional[TrainingSample]:
    target = encode_target("\n".join(target_lines), rep_cfg, vocab)
    if target is None:
        log.rejected_length += 1
        return None
    try:
        input_tokens = build_input(program, region, rep_cfg, vocab)
    except RegionTooLong:
        log.rejected_length += 1
        return None
    return TrainingSample(
        direction=direction,
        input_tokens=tuple(input_tokens),
        target_tokens=tuple(target),
        origin=ORIGIN_BACKTRANSLATION,
        iteration=iteration,
        source_program=base_name,
        span=region,
    )


def _finetune(
    model: Seq2SeqModel,
    direction: str,
    store: SampleStore,
    cfg: LoopConfig,
    train_cfg: TrainConfig,
    iteration: int,
) -> float:
    samples = store.samples_for(direction, cfg.include_mechanical)
    split_seed = derive_seed(f"bt-{direction}-holdout", cfg.seed, iteration)
    train_set, val_set = split_holdout(samples, HOLDOUT_FRACTION, split_seed)
    result = train(model, train_set, val_set, train_cfg)
    return result.best_val_loss


def _fixer_half(
    fixer: Seq2SeqModel,
    breaker: Seq2SeqModel,
    bug_seeds: list[BugSeed],
    suites: dict,
    store: SampleStore,
    cfg: LoopConfig,
    rep_cfg: RepresentationConfig,
    train_cfg: TrainConfig,
    vocab: Vocabulary,
    iteration: int,
    log: IterationLog,
) -> None:
    """Fixer proposes repairs; survivors train the breaker."""
    critic = CriticKind(cfg.critic_family, POLARITY_CORRECT)
    batch: list[TrainingSample] = []
    for seed in bug_seeds:
        try:
            proposals = propose_regions(fixer, seed.program, seed.region, cfg.k_correct, rep_cfg, vocab)
        except RegionTooLong:
            log.rejected_length += 1
            continue
        batch_log = BatchLog(phase="fix_candidates", base_name=seed.base_name)
        candidates: list[tuple[SourceProgram, object]] = []
        for text, _score in proposals:
            result = splice_region(seed.program.text, seed.region, text.split("\n"))
            if result.mutant_text == seed.program.text:
                continue  # a no-op "fix" is not a fix
            candidates.append((SourceProgram(f"{seed.base_name}+fix", result.mutant_text), result))
        log.fix_candidates += len(candidates)
        kept, _ = filter_candidates(critic, candidates, suites[seed.base_name], cfg.fuel, jobs=cfg.jobs)
        kept_ids = {id(program) for program, _, _ in kept}
        for program, _meta in candidates:
            batch_log.candidates.append(
                CandidateRecord(program.text, id(program) in kept_ids, content_hash(program.text))
            )
        log.batches.append(batch_log)
        log.fix_kept += len(kept)
        for fixed_program, result, _verdict in kept:
            sample = _sample_from_edit(
                DIRECTION_BREAK, fixed_program, result.mutant_region,
                result.base_region_lines, seed.base_name, iteration, rep_cfg, vocab, log,
            )
            if sample is not None:
                batch.append(sample)
    log.break_samples_appended = store.append(batch)
    if log.fix_kept > 0:
        log.breaker_val_loss = _finetune(breaker, DIRECTION_BREAK, store, cfg, train_cfg, iteration)
        log.breaker_finetuned = True


def _breaker_half(
    fixer: Seq2SeqModel,
    breaker: Seq2SeqModel,
    entries: list[CorpusEntry],
    store: SampleStore,
    cfg: LoopConfig,
    rep_cfg: RepresentationConfig,
    train_cfg: TrainConfig,
    vocab: Vocabulary,
    iteration: int,
    log: IterationLog,
) -> list[BugSeed]:
    """Breaker corrupts correct seeds; survivors train the fixer and
    become new buggy seeds."""
    critic = CriticKind(cfg.critic_family, POLARITY_BUGGY)
    batch: list[TrainingSample] = []
    new_seeds: list[BugSeed] = []
    for entry in sorted(correct_entries(entries), key=lambda e: e.name):
        locations = enumerate_statement_locations(entry.ast)
        if cfg.max_locations_per_program and len(locations) > cfg.max_locations_per_program:
            rng = derive_rng("bt-locations", cfg.seed, iteration, entry.name)
            keep = sorted(
                rng.choice(len(locations), size=cfg.max_locations_per_program, replace=False).tolist()
            )
            locations = [locations[i] for i in keep]
        batch_log = BatchLog(phase="bug_candidates", base_name=entry.name)
        candidates: list[tuple[SourceProgram, object]] = []
        for span in locations:
            try:
                proposals = propose_regions(breaker, entry.program, span, cfg.k_buggy, rep_cfg, vocab)
            except RegionTooLong:
                log.rejected_length += 1
                continue
            for text, _score in proposals:
                result = splice_region(entry.program.text, span, text.split("\n"))
                candidates.append((SourceProgram(f"{entry.name}+bug", result.mutant_text), result))
        log.bug_candidates += len(candidates)
        kept, _ = filter_candidates(critic, candidates, entry.suite, cfg.fuel, jobs=cfg.jobs)
        kept_ids = {id(program) for program, _, _ in kept}
        for program, _meta in candidates:
            batch_log.candidates.append(
                CandidateRecord(program.text, id(program) in kept_ids, content_hash(program.text))
            )
        log.batches.append(batch_log)
        log.bug_kept += len(kept)
        seen: set[str] = set()
        for mutant_program, result, _verdict in kept:
            sample = _sample_from_edit(
                DIRECTION_FIX, mutant_program, result.mutant_region,
                result.base_region_lines, entry.name, iteration, rep_cfg, vocab, log,
            )
            if sample is not None:
                batch.append(sample)
            mutant_key = content_hash([mutant_program.text, str(result.mutant_region)])
            if mutant_key not in seen:
                seen.add(mutant_key)
                new_seeds.append(
                    BugSeed(
                        program=SourceProgram(f"{entry.name}@bt{iteration}", mutant_program.text),
                        region=result.mutant_region,
                        base_name=entry.name,
                    )
                )
    log.fix_samples_appended = store.append(batch)
    if log.bug_kept > 0:
        log.fixer_val_loss = _finetune(fixer, DIRECTION_FIX, store, cfg, train_cfg, iteration)
        log.fixer_finetuned = True
    return new_seeds


def bt_iteration(
    fixer: Seq2SeqModel,
    breaker: Seq2SeqModel,
    entries: list[CorpusEntry],
    bug_seeds: list[BugSeed],
    store: SampleStore,
    cfg: LoopConfig,
    rep_cfg: RepresentationConfig,
    train_cfg: TrainConfig,
    vocab: Vocabulary,
    iteration: int,
) -> tuple[IterationLog, list[BugSeed]]:
    """One full back-translation round. Models are fine-tuned in place;
    returns the log and the bug seeds accepted this round."""
    started = time.time()
    log = IterationLog(iteration=iteration, critic_family=cfg.critic_family, order=cfg.order)
    suites = {entry.name: entry.suite for entry in entries}
    if cfg.order == ORDER_FIXER_FIRST:
        _fixer_half(fixer, breaker, bug_seeds, suites, store, cfg, rep_cfg, train_cfg, vocab, iteration, log)
        new_seeds = _breaker_half(fixer, breaker, entries, store, cfg, rep_cfg, train_cfg, vocab, iteration, log)
    else:
        new_seeds = _breaker_half(fixer, breaker, entries, store, cfg, rep_cfg, train_cfg, vocab, iteration, log)
        # bugs accepted moments ago are legitimate repair prompts already
        _fixer_half(fixer, breaker, bug_seeds + new_seeds, suites, store, cfg, rep_cfg, train_cfg, vocab, iteration, log)
    log.store_total_after = len(store)
    log.wall_clock_sec = time.time() - started
    return log, new_seeds


def run_loop(
    fixer: Seq2SeqModel,
    breaker: Seq2SeqModel,
    entries: list[CorpusEntry],
    store: SampleStore,
    cfg: LoopConfig,
    rep_cfg: RepresentationConfig,
    train_cfg: TrainConfig,
    vocab: Vocabulary,
    run_dir: Optional[Path] = None,
) -> list[IterationLog]:
    """N alternating iterations; per-iteration checkpoints and logs are
    persisted under run_dir/iter<k>/ when a run directory is given."""
    import json

    logs: list[IterationLog] = []
    bug_seeds = initial_bug_seeds(entries)
    for iteration in range(1, cfg.iterations + 1):
        before = len(store)
        iter_train_cfg = TrainConfig(
            batch_size=train_cfg.batch_size,
            learning_rate=train_cfg.learning_rate,
            weight_decay=train_cfg.weight_decay,
            max_epochs=train_cfg.max_epochs,
            patience=train_cfg.patience,
            seed=derive_seed("bt-train", train_cfg.seed, iteration),
        )
        try:
            log, new_seeds = bt_iteration(
                fixer, breaker, entries, bug_seeds, store, cfg, rep_cfg, train_cfg=iter_train_cfg,
                vocab=vocab, iteration=iteration,
            )
        except Exception as err:
            raise RuntimeError(f"back-translation iteration {iteration} failed: {err}") from err
        assert len(store) >= before, "store must never shrink"
        known = {(s.base_name, s.program.text, s.region) for s in bug_seeds}
        for seed in new_seeds:
            key = (seed.base_name, seed.program.text, seed.region)
            if key not in known:
                known.add(key)
                bug_seeds.append(seed)
        logs.append(log)
        if run_dir is not None:
            iter_dir = Path(run_dir) / f"iter{iteration}"
            iter_dir.mkdir(parents=True, exist_ok=True)
            save_checkpoint(fixer, iter_dir / "fixer.ckpt")
            save_checkpoint(breaker, iter_dir / "breaker.ckpt")
            (iter_dir / "log.json").write_text(
                json.dumps(log.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
    return logs
