from pathlib import Path

import pytest

from singledet.corpus import Corpus, load_corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def sh1() -> Corpus:
    """Two Hindi sentences about a film premiere: 8 mentions, 2 singletons."""
    return load_corpus(DATA_DIR / "sh1.jsonl")
