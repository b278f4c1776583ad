"""Run configuration: one JSON file, overridable by CLI flags, with
defaults matching the per-module values. Precedence: flags > file >
defaults. Every command echoes its fully-resolved configuration into
its output directory."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .backtranslate import LoopConfig
from .minilang import DEFAULT_FUEL
from .model import ModelConfig, TrainConfig
from .representation import RepresentationConfig


def _default_jobs() -> int:
    import os

    return max(1, os.cpu_count() or 1)


@dataclass
class RunConfig:
    seed: int = 0
    corpus_dir: str = "corpus"
    work_dir: str = "work"
    jobs: int = field(default_factory=_default_jobs)
    eval_k: int = 100
    fuel: int = DEFAULT_FUEL
    per_location_cap: int = 4
    model_preset: str = "desk"  # desk | tiny
    model: dict = field(default_factory=dict)  # ModelConfig overrides
    train: dict = field(default_factory=dict)  # TrainConfig overrides
    loop: dict = field(default_factory=dict)  # LoopConfig overrides
    representation: dict = field(default_factory=dict)

    @staticmethod
    def from_file(path: str | Path) -> "RunConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return RunConfig.from_json(raw)

    @staticmethod
    def from_json(raw: dict) -> "RunConfig":
        cfg = RunConfig()
        for key in ("seed", "corpus_dir", "work_dir", "jobs", "eval_k", "fuel",
                    "per_location_cap", "model_preset"):
            if key in raw:
                setattr(cfg, key, raw[key])
        for key in ("model", "train", "loop", "representation"):
            if key in raw:
                if not isinstance(raw[key], dict):
                    raise ValueError(f"config section {key!r} must be an object")
                setattr(cfg, key, dict(raw[key]))
        return cfg

    def apply_overrides(
        self,
        seed: Optional[int] = None,
        critic: Optional[str] = None,
        iterations: Optional[int] = None,
        beam: Optional[int] = None,
        jobs: Optional[int] = None,
    ) -> None:
        if seed is not None:
            self.seed = seed
        if critic is not None:
            self.loop["critic_family"] = critic
        if iterations is not None:
            self.loop["iterations"] = iterations
        if beam is not None:
            self.eval_k = beam
        if jobs is not None:
            self.jobs = jobs

    # --- resolved sub-configurations ---

    def representation_config(self) -> RepresentationConfig:
        return RepresentationConfig(**self.representation)

    def model_config(self, vocab_size: int) -> ModelConfig:
        overrides = dict(self.model)
        overrides.setdefault("seed", self.seed)
        rep = self.representation_config()
        overrides.setdefault("max_src_len", rep.max_input_len)
        overrides.setdefault("max_tgt_len", rep.max_target_len)
        if self.model_preset == "tiny":
            return ModelConfig.tiny(vocab_size=vocab_size, **overrides)
        if self.model_preset == "desk":
            return ModelConfig.desk(vocab_size=vocab_size, **overrides)
        raise ValueError(f"unknown model preset {self.model_preset!r}")

    def train_config(self) -> TrainConfig:
        overrides = dict(self.train)
        overrides.setdefault("seed", self.seed)
        return TrainConfig(**overrides)

    def loop_config(self) -> LoopConfig:
        overrides = dict(self.loop)
        overrides.setdefault("seed", self.seed)
        overrides.setdefault("fuel", self.fuel)
        overrides.setdefault("jobs", self.jobs)
        return LoopConfig(**overrides)

    def resolved_json(self, vocab_size: Optional[int] = None) -> dict[str, Any]:
        out = {
            "seed": self.seed,
            "corpus_dir": self.corpus_dir,
            "work_dir": self.work_dir,
            "jobs": self.jobs,
            "eval_k": self.eval_k,
            "fuel": self.fuel,
            "per_location_cap": self.per_location_cap,
            "model_preset": self.model_preset,
            "train": self.train_config().to_json(),
            "loop": self.loop_config().to_json(),
            "representation": {
                "context_lines": self.representation_config().context_lines,
                "max_input_len": self.representation_config().max_input_len,
                "max_target_len": self.representation_config().max_target_len,
            },
        }
        if vocab_size is not None:
            out["model"] = self.model_config(vocab_size).to_json()
        else:
            out["model"] = dict(self.model)
        return out
