"""Pre-trained word vectors with a shared zero row for padding and OOV.

Input is the word2vec text format: an optional "V D" header line, then one
word per line followed by D decimal components.  Words are matched exactly
(after NFC normalization, mirroring corpus loading); anything unknown maps
to index 0, whose row is all zeros, so padding and out-of-vocabulary words
have the same embedding consequence.  Vectors are frozen: nothing in this
package ever trains them.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["EmbeddingTable", "EmbeddingError", "load_word_vectors", "save_word_vectors"]

log = logging.getLogger(__name__)

PAD_INDEX = 0


class EmbeddingError(ValueError):
    """Malformed word-vector file."""


@dataclass
class EmbeddingTable:
    """Vocabulary plus an embedding matrix whose row 0 is the zero vector.

    ``vocab`` maps each word to its row in [1, V]; ``matrix`` has V+1 rows.
    The matrix buffer is marked read-only: these vectors are inputs, not
    parameters.
    """

    vocab: dict[str, int]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.vocab) + 1:
            raise EmbeddingError(
                f"matrix has {self.matrix.shape[0]} rows for {len(self.vocab)} words"
            )
        indices = sorted(self.vocab.values())
        if indices != list(range(1, len(self.vocab) + 1)):
            raise EmbeddingError("vocab indices must cover 1..V exactly once")
        if self.matrix[PAD_INDEX].any():
            raise EmbeddingError("row 0 is reserved for padding/OOV and must be zero")
        self.matrix.flags.writeable = False

    @classmethod
    def from_mapping(cls, vectors: Mapping[str, Sequence[float]]) -> "EmbeddingTable":
        """Build a table from word → vector, indices in mapping order."""
        if not vectors:
            raise EmbeddingError("need at least one word vector")
        dims = {len(v) for v in vectors.values()}
        if len(dims) != 1:
            raise EmbeddingError(f"inconsistent vector dimensions {sorted(dims)}")
        (dim,) = dims
        matrix = np.zeros((len(vectors) + 1, dim))
        vocab = {}
        for i, (word, vec) in enumerate(vectors.items(), start=1):
            vocab[word] = i
            matrix[i] = vec
        return cls(vocab, matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def index_of(self, word: str) -> int:
        """Row index of a word; 0 for anything out of vocabulary."""
        return self.vocab.get(word, PAD_INDEX)

    def indices(self, words: Iterable[str]) -> list[int]:
        return [self.index_of(w) for w in words]

    def lookup(self, word: str) -> np.ndarray:
        """Embedding row of a word; the zero vector when unknown."""
        return self.matrix[self.index_of(word)]

    def rows(self, ids: Sequence[int]) -> np.ndarray:
        """Stack the embedding rows for a sequence of indices."""
        return self.matrix[np.asarray(ids, dtype=np.intp)]


def _parse_header(line: str) -> tuple[int, int] | None:
    parts = line.split()
    if len(parts) != 2:
        return None
    try:
        v, d = int(parts[0]), int(parts[1])
    except ValueError:
        return None
    if v <= 0 or d <= 0:
        return None
    return v, d


def load_word_vectors(path: str | Path, max_words: int | None = None) -> EmbeddingTable:
    """Read a word2vec text file into an EmbeddingTable.

    A leading "V D" header is used when present; otherwise the dimension
    is inferred from the first vector line and V by counting.  At most
    ``max_words`` words are kept, in file order.  Duplicate words keep
    their first vector (with a warning); a component count that differs
    from the established dimension is an error naming the line.
    """
    if max_words is not None and max_words <= 0:
        raise ValueError(f"max_words must be positive, got {max_words}")

    declared_v: int | None = None
    dim: int | None = None
    words: list[str] = []
    rows: list[np.ndarray] = []
    vocab: dict[str, int] = {}

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if lineno == 1:
                header = _parse_header(line)
                if header is not None:
                    declared_v, dim = header
                    continue
            parts = line.split()
            word = unicodedata.normalize("NFC", parts[0])
            comps = parts[1:]
            if dim is None:
                dim = len(comps)
                if dim == 0:
                    raise EmbeddingError(f"line {lineno}: no vector components")
            if len(comps) != dim:
                raise EmbeddingError(
                    f"line {lineno}: expected {dim} components, found {len(comps)}"
                )
            if word in vocab:
                log.warning("duplicate word %r at line %d; keeping first vector", word, lineno)
                continue
            if max_words is not None and len(words) >= max_words:
                break
            try:
                vec = np.array([float(c) for c in comps])
            except ValueError as exc:
                raise EmbeddingError(f"line {lineno}: non-numeric vector component") from exc
            vocab[word] = len(words) + 1
            words.append(word)
            rows.append(vec)

    if dim is None:
        raise EmbeddingError("file contains no vectors")
    if declared_v is not None and max_words is None and len(words) != declared_v:
        raise EmbeddingError(f"header declares {declared_v} words but file has {len(words)}")

    matrix = np.zeros((len(words) + 1, dim))
    for i, row in enumerate(rows, start=1):
        matrix[i] = row
    return EmbeddingTable(vocab, matrix)


def save_word_vectors(table: EmbeddingTable, path: str | Path) -> None:
    """Write word2vec text format with a "V D" header.

    Components use repr, so a load round-trips float64 values exactly.
    """
    by_index = sorted(table.vocab.items(), key=lambda kv: kv[1])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{table.vocab_size} {table.dim}\n")
        for word, index in by_index:
            comps = " ".join(repr(c) for c in table.matrix[index].tolist())
            fh.write(f"{word} {comps}\n")
