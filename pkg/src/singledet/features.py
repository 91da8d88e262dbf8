"""Fixed-shape encoding of mentions: word ids, context ids, syntactic flags.

Every mention becomes an EncodedExample of exactly the configured lengths,
whatever the mention or sentence length, because the downstream convolution
input shape is fixed.  Index 0 doubles as padding and OOV.  Context comes
from the mention's own sentence only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .corpus import Corpus, Document, LabeledMention
from .embeddings import EmbeddingTable

__all__ = [
    "ContextMode",
    "FeatureConfig",
    "EncodedExample",
    "SYNTACTIC_SIZE",
    "parse_feature_groups",
    "encode_mention_words",
    "extract_context",
    "syntactic_vector",
    "encode_corpus",
    "examples_to_matrix",
    "matrix_to_examples",
]

SYNTACTIC_SIZE = 3

# Largest convolution filter width; encoded sequences must be at least this long.
MIN_SEQUENCE_LEN = 4


class ContextMode(str, Enum):
    """How many sentence tokens around the mention form its context."""

    TWO_BY_TWO = "two"
    ALL_WORDS = "all"


def parse_feature_groups(spec: str) -> dict[str, bool]:
    """Turn a group list like "words,context" into use_* switch values.

    "+" works as a separator too, so one combination can be written as a
    single token ("words+context") where commas already mean something.
    """
    groups = {g.strip() for g in re.split(r"[+,]", spec) if g.strip()}
    unknown = groups - {"words", "context", "syntactic"}
    if unknown:
        raise ValueError(f"unknown feature group(s): {sorted(unknown)}")
    if not groups:
        raise ValueError("feature list is empty")
    return {
        "use_words": "words" in groups,
        "use_context": "context" in groups,
        "use_syntactic": "syntactic" in groups,
    }


@dataclass
class FeatureConfig:
    """Shapes and switches for mention encoding.

    The ``use_*`` switches select which input groups the classifier reads;
    they never change encoded shapes, so ablations stay checkpoint- and
    matrix-compatible.
    """

    max_mention_len: int = 10
    context_mode: ContextMode = ContextMode.TWO_BY_TWO
    context_len: int = 10
    use_words: bool = True
    use_context: bool = True
    use_syntactic: bool = True

    def __post_init__(self):
        self.context_mode = ContextMode(self.context_mode)
        for name in ("max_mention_len", "context_len"):
            v = getattr(self, name)
            if v < MIN_SEQUENCE_LEN:
                raise ValueError(f"{name} must be at least {MIN_SEQUENCE_LEN}, got {v}")
        if not (self.use_words or self.use_context or self.use_syntactic):
            raise ValueError("at least one input group must be enabled")


@dataclass(frozen=True)
class EncodedExample:
    """One mention as fixed-length id sequences plus flags and label."""

    mention_ids: tuple[int, ...]
    context_ids: tuple[int, ...]
    syntactic: tuple[int, int, int]
    label: int


def _pad(ids: list[int], length: int) -> tuple[int, ...]:
    return tuple(ids[:length]) + (0,) * (length - min(len(ids), length))


def encode_mention_words(
    mention: LabeledMention, doc: Document, table: EmbeddingTable, cfg: FeatureConfig
) -> tuple[int, ...]:
    """Mention token ids, truncated to the first max_mention_len, right-padded."""
    words = doc.sentences[mention.sentence_index][mention.start : mention.end]
    return _pad(table.indices(words), cfg.max_mention_len)


def extract_context(
    mention: LabeledMention, doc: Document, table: EmbeddingTable, cfg: FeatureConfig
) -> tuple[int, ...]:
    """Context token ids around the mention, right-padded to context_len.

    TWO_BY_TWO keeps up to 2 tokens on each side.  ALL_WORDS keeps every
    sentence token outside the span, center-truncated to the budget by
    retaining the tokens nearest the mention (half the budget per side;
    a short side donates its unused slots to the other).
    """
    sentence = doc.sentences[mention.sentence_index]
    before = sentence[: mention.start]
    after = sentence[mention.end :]
    if cfg.context_mode is ContextMode.TWO_BY_TWO:
        kept = before[-2:] + after[:2]
    else:
        half = cfg.context_len // 2
        n_before = min(len(before), half + max(0, cfg.context_len - half - len(after)))
        n_after = min(len(after), cfg.context_len - min(len(before), half))
        kept = (before[len(before) - n_before :] if n_before else []) + after[:n_after]
    return _pad(table.indices(kept), cfg.context_len)


def syntactic_vector(mention: LabeledMention) -> np.ndarray:
    """[is_pronoun, is_proper_name, is_first_person_pronoun] as 0/1 reals."""
    return np.array(
        [mention.is_pronoun, mention.is_proper_name, mention.is_first_person_pronoun],
        dtype=np.float64,
    )


def encode_corpus(
    mentions: Sequence[LabeledMention],
    corpus: Corpus,
    table: EmbeddingTable,
    cfg: FeatureConfig,
) -> list[EncodedExample]:
    """Encode mentions in order, one EncodedExample each."""
    out = []
    for m in mentions:
        doc = corpus.document(m.doc_id)
        out.append(
            EncodedExample(
                mention_ids=encode_mention_words(m, doc, table, cfg),
                context_ids=extract_context(m, doc, table, cfg),
                syntactic=(m.is_pronoun, m.is_proper_name, m.is_first_person_pronoun),
                label=m.label,
            )
        )
    return out


def examples_to_matrix(
    examples: Sequence[EncodedExample], cfg: FeatureConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Stack examples into (X, y): columns are [mention | context | syntactic]."""
    width = cfg.max_mention_len + cfg.context_len + SYNTACTIC_SIZE
    X = np.zeros((len(examples), width))
    y = np.zeros(len(examples), dtype=np.intp)
    for i, ex in enumerate(examples):
        X[i, : cfg.max_mention_len] = ex.mention_ids
        X[i, cfg.max_mention_len : cfg.max_mention_len + cfg.context_len] = ex.context_ids
        X[i, cfg.max_mention_len + cfg.context_len :] = ex.syntactic
        y[i] = ex.label
    return X, y


def matrix_to_examples(
    X: np.ndarray, y: np.ndarray | None, cfg: FeatureConfig
) -> list[EncodedExample]:
    """Reverse of examples_to_matrix; labels default to 0 when y is None."""
    width = cfg.max_mention_len + cfg.context_len + SYNTACTIC_SIZE
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != width:
        raise ValueError(f"expected a 2-d matrix with {width} columns, got shape {X.shape}")
    id_part = X[:, : cfg.max_mention_len + cfg.context_len]
    if (id_part < 0).any() or (id_part != np.round(id_part)).any():
        raise ValueError("id columns must hold non-negative integers")
    syn_part = X[:, cfg.max_mention_len + cfg.context_len :]
    if not np.isin(syn_part, (0.0, 1.0)).all():
        raise ValueError("syntactic columns must be 0 or 1")
    labels = np.zeros(len(X), dtype=np.intp) if y is None else np.asarray(y, dtype=np.intp)
    if labels.shape != (len(X),):
        raise ValueError(f"y has shape {labels.shape}, expected ({len(X)},)")
    out = []
    for row, label in zip(X, labels):
        if label not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {label}")
        out.append(
            EncodedExample(
                mention_ids=tuple(int(v) for v in row[: cfg.max_mention_len]),
                context_ids=tuple(
                    int(v) for v in row[cfg.max_mention_len : cfg.max_mention_len + cfg.context_len]
                ),
                syntactic=tuple(int(v) for v in row[cfg.max_mention_len + cfg.context_len :]),
                label=int(label),
            )
        )
    return out
