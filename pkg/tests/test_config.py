from __future__ import annotations

import json

import pytest

from jayfix.config import RunConfig
from jayfix.representation import RepresentationConfig


def test_package_defaults():
    cfg = RunConfig()
    assert cfg.eval_k == 100  # inference beam width
    assert cfg.fuel == 100_000
    assert cfg.per_location_cap == 4
    loop = cfg.loop_config()
    assert loop.k_correct == 10 and loop.k_buggy == 1
    assert loop.critic_family == "compiler"
    assert loop.iterations == 2
    rep = cfg.representation_config()
    assert rep.context_lines == 3
    assert rep.max_input_len == 256 and rep.max_target_len == 64
    train = cfg.train_config()
    assert (train.batch_size, train.learning_rate, train.weight_decay) == (16, 1e-4, 0.01)


def test_flag_precedence_over_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 3, "eval_k": 50, "loop": {"critic_family": "tests"}}))
    cfg = RunConfig.from_file(path)
    assert cfg.eval_k == 50
    cfg.apply_overrides(seed=9, critic="none", iterations=5, beam=7, jobs=2)
    assert cfg.seed == 9
    assert cfg.eval_k == 7
    assert cfg.loop_config().critic_family == "none"
    assert cfg.loop_config().iterations == 5
    assert cfg.jobs == 2


def test_desk_model_config_dimensions():
    cfg = RunConfig()
    model = cfg.model_config(vocab_size=380)
    assert (model.d_model, model.d_ff, model.n_heads) == (128, 512, 4)
    assert model.n_encoder_layers == model.n_decoder_layers == 2
    assert model.dropout == 0.1


def test_bad_config_section_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"loop": "compiler"}))
    with pytest.raises(ValueError):
        RunConfig.from_file(path)


def test_representation_validation():
    with pytest.raises(ValueError):
        RepresentationConfig(context_lines=-1)
    with pytest.raises(ValueError):
        RepresentationConfig(max_input_len=4)
