"""Checkpoint container: a numpy .npz archive with named parameter
arrays plus a JSON metadata entry (format version, model config echo,
training-step counter). See docs/checkpoint.md for the byte layout.
Round-tripping a model through save/load reproduces its outputs
bit-for-bit on the same platform.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .transformer import ModelConfig, Seq2SeqModel

CHECKPOINT_FORMAT = 1
_META_KEY = "__meta__"


def save_checkpoint(model: Seq2SeqModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format": CHECKPOINT_FORMAT,
        "config": model.config.to_json(),
        "step": model.step,
    }
    arrays = {f"param/{name}": tensor.data for name, tensor in model.params.items()}
    arrays[_META_KEY] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path: str | Path) -> Seq2SeqModel:
    path = Path(path)
    with np.load(path) as archive:
        if _META_KEY not in archive:
            raise ValueError(f"{path}: not a checkpoint (missing metadata)")
        meta = json.loads(bytes(archive[_META_KEY]).decode("utf-8"))
        if meta.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path}: unsupported checkpoint format {meta.get('format')}")
        config = ModelConfig.from_json(meta["config"])
        arrays = {
            key[len("param/") :]: archive[key]
            for key in archive.files
            if key.startswith("param/")
        }
    model = Seq2SeqModel(config)
    model.load_state_arrays(arrays)
    model.step = int(meta.get("step", 0))
    return model
