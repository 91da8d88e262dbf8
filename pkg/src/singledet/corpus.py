"""Span-annotated mention corpora: loading, statistics, and splits.

A corpus file is JSON Lines, one object per line, mixing two line kinds:

    {"doc": "<id>", "sentences": [["tok", ...], ...]}
    {"mention": {"doc": "<id>", "sent": 0, "start": 1, "end": 3,
                 "label": 1, "pron": 0, "proper": 1, "first_person": 0}}

``label`` is 1 for a singleton mention (referenced exactly once in the
text) and 0 for a coreferential one.  The three binary flags are optional;
when absent, ``pron`` and ``first_person`` are auto-filled from a small
built-in Hindi pronoun list and ``proper`` defaults to 0.  File-provided
values always win.  Text is handled as opaque unicode, normalized to NFC.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

__all__ = [
    "Token",
    "Document",
    "LabeledMention",
    "Corpus",
    "SplitSpec",
    "CorpusError",
    "load_corpus",
    "save_corpus",
    "singleton_ratio",
    "split",
    "corpus_stats",
]

SINGLETON = 1
NON_SINGLETON = 0

# Small Hindi pronoun lexicon used only to auto-fill missing flags.
FIRST_PERSON_PRONOUNS = frozenset(
    "मैं हम मुझे हमें मेरा मेरी मेरे हमारा हमारी हमारे मुझको हमको मैंने हमने".split()
)
PRONOUNS = (
    frozenset(
        "तू तुम आप यह वह ये वे उसका उसकी उसके इसका इसकी इसके उनका उनकी उनके "
        "तेरा तुम्हारा आपका तुम्हें उसे इसे उन्हें इन्हें उसने इसने उन्होंने इन्होंने "
        "जो कोई कौन क्या खुद स्वयं अपना अपनी अपने".split()
    )
    | FIRST_PERSON_PRONOUNS
)


class CorpusError(ValueError):
    """Malformed corpus file or violated corpus invariant."""


class Token(NamedTuple):
    """A surface form at a 0-based position within its sentence."""

    surface: str
    index: int


@dataclass
class Document:
    """An identified document: an ordered list of tokenized sentences."""

    id: str
    sentences: list[list[str]]

    def iter_tokens(self) -> Iterator[Token]:
        for sentence in self.sentences:
            for i, surface in enumerate(sentence):
                yield Token(surface, i)


@dataclass
class LabeledMention:
    """A token span with its gold singleton label and syntactic flags.

    ``start``/``end`` index tokens of one sentence, end exclusive.  Flags
    are stored as 0/1 ints, matching the wire format.
    """

    doc_id: str
    sentence_index: int
    start: int
    end: int
    label: int
    is_pronoun: int = 0
    is_proper_name: int = 0
    is_first_person_pronoun: int = 0

    def describe(self) -> str:
        return f"doc {self.doc_id!r} sentence {self.sentence_index} span [{self.start},{self.end})"


@dataclass
class Corpus:
    """Documents plus their labeled mentions.  Treat as immutable after load."""

    documents: list[Document]
    mentions: list[LabeledMention]
    _by_id: dict[str, Document] = field(init=False, repr=False)

    def __post_init__(self):
        self._by_id = {}
        for doc in self.documents:
            if doc.id in self._by_id:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            self._by_id[doc.id] = doc
        for m in self.mentions:
            self._check_mention(m)

    def _check_mention(self, m: LabeledMention) -> None:
        doc = self._by_id.get(m.doc_id)
        if doc is None:
            raise CorpusError(f"mention references unknown doc_id {m.doc_id!r}")
        if not 0 <= m.sentence_index < len(doc.sentences):
            raise CorpusError(f"sentence index out of range for {m.describe()}")
        n = len(doc.sentences[m.sentence_index])
        if not 0 <= m.start < m.end <= n:
            raise CorpusError(f"span out of bounds for {m.describe()} (sentence has {n} tokens)")
        if m.label not in (0, 1):
            raise CorpusError(f"label must be 0 or 1 for {m.describe()}")
        for flag in (m.is_pronoun, m.is_proper_name, m.is_first_person_pronoun):
            if flag not in (0, 1):
                raise CorpusError(f"flags must be 0 or 1 for {m.describe()}")

    def document(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def mention_tokens(self, m: LabeledMention) -> list[str]:
        return self.document(m.doc_id).sentences[m.sentence_index][m.start : m.end]


@dataclass
class SplitSpec:
    """Fractions and seed controlling the document-level split."""

    test_fraction: float = 0.20
    validation_fraction_of_train: float = 0.20
    seed: int = 0

    def __post_init__(self):
        for name in ("test_fraction", "validation_fraction_of_train"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be strictly between 0 and 1, got {v}")


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


def _autofill_flags(raw: dict, tokens: list[str]) -> tuple[int, int, int]:
    """Resolve the three binary flags, preferring file values."""
    single = tokens[0] if len(tokens) == 1 else None
    pron = raw.get("pron")
    if pron is None:
        pron = 1 if single in PRONOUNS else 0
    first = raw.get("first_person")
    if first is None:
        first = 1 if single in FIRST_PERSON_PRONOUNS else 0
    proper = raw.get("proper", 0)
    return int(pron), int(proper), int(first)


def load_corpus(path: str | Path, require_labels: bool = True) -> Corpus:
    """Parse and validate a JSON Lines corpus file.

    With ``require_labels=False`` mention lines may omit ``label`` (it
    defaults to 0), which supports prediction-time input.  Every format
    error names the offending 1-based line number.
    """
    documents: list[Document] = []
    seen_ids: set[str] = set()
    raw_mentions: list[tuple[int, dict]] = []

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or ("doc" in obj) == ("mention" in obj):
                raise CorpusError(f"line {lineno}: expected exactly one of 'doc' or 'mention'")
            if "doc" in obj:
                documents.append(_parse_doc_line(obj, lineno, seen_ids))
            else:
                raw_mentions.append((lineno, obj["mention"]))

    by_id = {d.id: d for d in documents}
    mentions = []
    for lineno, raw in raw_mentions:
        mentions.append(_parse_mention(raw, lineno, by_id, require_labels))
    return Corpus(documents, mentions)


def _parse_doc_line(obj: dict, lineno: int, seen_ids: set[str]) -> Document:
    doc_id = obj.get("doc")
    sentences = obj.get("sentences")
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"line {lineno}: 'doc' must be a non-empty string")
    if doc_id in seen_ids:
        raise CorpusError(f"line {lineno}: duplicate document id {doc_id!r}")
    if not isinstance(sentences, list) or not sentences:
        raise CorpusError(f"line {lineno}: 'sentences' must be a non-empty list")
    parsed = []
    for si, sent in enumerate(sentences):
        if not isinstance(sent, list) or not sent:
            raise CorpusError(f"line {lineno}: sentence {si} of doc {doc_id!r} is empty")
        toks = []
        for tok in sent:
            if not isinstance(tok, str) or not tok:
                raise CorpusError(f"line {lineno}: empty or non-string token in doc {doc_id!r}")
            toks.append(_nfc(tok))
        parsed.append(toks)
    seen_ids.add(doc_id)
    return Document(doc_id, parsed)


def _parse_mention(raw: dict, lineno: int, by_id: dict[str, Document], require_labels: bool) -> LabeledMention:
    if not isinstance(raw, dict):
        raise CorpusError(f"line {lineno}: 'mention' must be an object")
    try:
        doc_id = raw["doc"]
        sent = int(raw["sent"])
        start = int(raw["start"])
        end = int(raw["end"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"line {lineno}: mention needs doc/sent/start/end fields") from exc
    doc = by_id.get(doc_id)
    if doc is None:
        raise CorpusError(f"line {lineno}: mention references unknown doc_id {doc_id!r}")
    if not 0 <= sent < len(doc.sentences):
        raise CorpusError(f"line {lineno}: sentence index {sent} out of range for doc {doc_id!r}")
    n = len(doc.sentences[sent])
    if not 0 <= start < end <= n:
        raise CorpusError(
            f"line {lineno}: span [{start},{end}) out of bounds for doc {doc_id!r} "
            f"sentence {sent} ({n} tokens)"
        )
    if "label" in raw:
        label = raw["label"]
    elif require_labels:
        raise CorpusError(f"line {lineno}: mention is missing 'label'")
    else:
        label = 0
    if label not in (0, 1):
        raise CorpusError(f"line {lineno}: label must be 0 or 1, got {label!r}")
    tokens = doc.sentences[sent][start:end]
    pron, proper, first = _autofill_flags(raw, tokens)
    return LabeledMention(doc_id, sent, start, end, int(label), pron, proper, first)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out in the JSON Lines format ``load_corpus`` reads."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps({"doc": doc.id, "sentences": doc.sentences}, ensure_ascii=False))
            fh.write("\n")
        for m in corpus.mentions:
            rec = {
                "doc": m.doc_id,
                "sent": m.sentence_index,
                "start": m.start,
                "end": m.end,
                "label": m.label,
                "pron": m.is_pronoun,
                "proper": m.is_proper_name,
                "first_person": m.is_first_person_pronoun,
            }
            fh.write(json.dumps({"mention": rec}, ensure_ascii=False))
            fh.write("\n")


def singleton_ratio(corpus: Corpus) -> float:
    """Fraction of mentions that are coreferential: (M - S) / M.

    1.0 means no singletons at all; 0.0 means every mention is a singleton.
    Computed as 1 - S/M, the form downstream comparisons reproduce; the
    algebraically equal (M-S)/M rounds differently for some counts.
    """
    m = len(corpus.mentions)
    if m == 0:
        raise CorpusError("singleton_ratio needs at least one mention")
    s = sum(1 for x in corpus.mentions if x.label == SINGLETON)
    return 1.0 - s / m


def split(
    corpus: Corpus, spec: SplitSpec | None = None
) -> tuple[list[LabeledMention], list[LabeledMention], list[LabeledMention]]:
    """Deterministic document-level (train, validation, test) partition.

    All mentions of a document land in the same partition, so context
    windows never straddle partitions.  Test gets round(n_docs *
    test_fraction) documents, validation round(remaining * fraction), and
    train absorbs the remainder.  Identical seeds give identical splits.
    """
    if spec is None:
        spec = SplitSpec()
    n = len(corpus.documents)
    if n == 0:
        raise CorpusError("cannot split an empty corpus")
    order = np.random.default_rng(spec.seed).permutation(n)
    n_test = round(n * spec.test_fraction)
    remaining = n - n_test
    n_val = round(remaining * spec.validation_fraction_of_train)
    n_train = remaining - n_val
    if min(n_test, n_val, n_train) <= 0:
        raise CorpusError(
            f"empty partition after rounding: train={n_train} val={n_val} test={n_test}"
        )
    test_ids = {corpus.documents[i].id for i in order[:n_test]}
    val_ids = {corpus.documents[i].id for i in order[n_test : n_test + n_val]}

    train_m: list[LabeledMention] = []
    val_m: list[LabeledMention] = []
    test_m: list[LabeledMention] = []
    for m in corpus.mentions:
        if m.doc_id in test_ids:
            test_m.append(m)
        elif m.doc_id in val_ids:
            val_m.append(m)
        else:
            train_m.append(m)
    if not train_m or not val_m or not test_m:
        raise CorpusError("a partition ended up with no mentions; use more documents")
    return train_m, val_m, test_m


def corpus_stats(corpus: Corpus) -> dict[str, int]:
    """Exact counts of documents, sentences, tokens, mentions, singletons."""
    return {
        "documents": len(corpus.documents),
        "sentences": sum(len(d.sentences) for d in corpus.documents),
        "tokens": sum(len(s) for d in corpus.documents for s in d.sentences),
        "mentions": len(corpus.mentions),
        "singletons": sum(1 for m in corpus.mentions if m.label == SINGLETON),
    }
