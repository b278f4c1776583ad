from __future__ import annotations

import json
from pathlib import Path

import pytest

from jayfix.corpus import load_corpus
from jayfix.representation import RepresentationConfig, Vocabulary

REPO_ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = REPO_ROOT / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture(scope="session")
def manifest() -> list[dict]:
    return json.loads((CORPUS_DIR / "manifest.json").read_text())


@pytest.fixture(scope="session")
def corpus_entries():
    entries, rejected = load_corpus(CORPUS_DIR)
    assert not rejected, rejected
    return entries


@pytest.fixture(scope="session")
def correct(corpus_entries):
    return [e for e in corpus_entries if e.status == "correct"]


@pytest.fixture(scope="session")
def buggy(corpus_entries):
    return [e for e in corpus_entries if e.status == "buggy"]


@pytest.fixture(scope="session")
def vocab(corpus_entries) -> Vocabulary:
    return Vocabulary.from_corpus([e.program.text for e in corpus_entries])


@pytest.fixture(scope="session")
def rep_cfg() -> RepresentationConfig:
    return RepresentationConfig()
