"""Generated corpora and embeddings for tests, demos, and benchmarks.

Three generators cover the standard checks on a trainable classifier:

* ``separable_corpus``: the label is written into the input twice over, as
  a marker token directly before the mention (visible to both context
  modes) and as the pronoun flag.  A model reading either signal can reach
  perfect accuracy, so failing to learn it indicates a broken pipeline.
* ``random_label_corpus``: labels carry no signal, but a unique token
  inside each mention makes every example identifiable, so a
  sufficient-capacity model can memorize the training set.
* ``scale_corpus``: exact document/sentence/token counts for exercising
  statistics and splits at a realistic corpus size.

``fixture_embeddings`` covers the full generated vocabulary, so encoded
examples contain no OOV ids unless a test introduces them deliberately.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .corpus import Corpus, Document, LabeledMention
from .embeddings import EmbeddingTable

__all__ = [
    "MARKER",
    "fixture_vocabulary",
    "fixture_embeddings",
    "separable_corpus",
    "random_label_corpus",
    "shuffle_labels",
    "scale_corpus",
]

MARKER = "marker"
N_FILLERS = 60


def fixture_vocabulary(n_fillers: int = N_FILLERS) -> list[str]:
    return [MARKER] + [f"tok{i}" for i in range(n_fillers)]


def fixture_embeddings(dim: int = 16, seed: int = 0, n_fillers: int = N_FILLERS) -> EmbeddingTable:
    """Random unit-scale vectors for every generated word; deterministic."""
    rng = np.random.default_rng(seed)
    words = fixture_vocabulary(n_fillers)
    return EmbeddingTable.from_mapping(
        {w: (0.5 * rng.standard_normal(dim)).tolist() for w in words}
    )


def _chunk_documents(
    sentences: list[list[str]],
    mentions_raw: list[tuple[int, int, int, int, int]],
    sentences_per_doc: int,
    doc_prefix: str,
) -> Corpus:
    """Group one-mention-per-sentence data into documents.

    ``mentions_raw`` rows are (sentence_index, start, end, label, pron).
    """
    documents = []
    mentions = []
    for d in range(0, len(sentences), sentences_per_doc):
        doc_id = f"{doc_prefix}{d // sentences_per_doc}"
        chunk = sentences[d : d + sentences_per_doc]
        documents.append(Document(doc_id, chunk))
        for si, start, end, label, pron in mentions_raw[d : d + sentences_per_doc]:
            mentions.append(LabeledMention(doc_id, si, start, end, label, pron, 0, 0))
    return Corpus(documents, mentions)


def separable_corpus(
    n_mentions: int = 500,
    seed: int = 0,
    sentences_per_doc: int = 5,
    doc_prefix: str = "doc",
    n_fillers: int = N_FILLERS,
) -> Corpus:
    """Balanced corpus whose labels are recoverable from two input groups.

    Each sentence holds one two-token mention at span [3,5).  For label 1
    the token at position 2 (inside every context window) is the marker
    and the pronoun flag is set; for label 0 both signals are absent.
    """
    rng = np.random.default_rng(seed)
    fillers = [f"tok{i}" for i in range(n_fillers)]
    sentences = []
    mentions_raw = []
    for i in range(n_mentions):
        label = i % 2
        words = [str(w) for w in rng.choice(fillers, size=6)]
        cue = MARKER if label else words.pop()
        sentence = [words[0], words[1], cue, words[2], words[3], words[4]]
        sentences.append(sentence)
        mentions_raw.append((i % sentences_per_doc, 3, 5, label, label))
    return _chunk_documents(sentences, mentions_raw, sentences_per_doc, doc_prefix)


def random_label_corpus(
    n_mentions: int = 50,
    seed: int = 0,
    sentences_per_doc: int = 5,
    doc_prefix: str = "rnd",
    n_fillers: int = N_FILLERS,
) -> Corpus:
    """Labels are pure noise; a unique first mention token identifies each
    example, so the training set is memorizable but nothing generalizes."""
    if n_mentions > n_fillers:
        raise ValueError(f"need at most {n_fillers} mentions to keep identifier tokens unique")
    rng = np.random.default_rng(seed)
    fillers = [f"tok{i}" for i in range(n_fillers)]
    sentences = []
    mentions_raw = []
    for i in range(n_mentions):
        words = [str(w) for w in rng.choice(fillers, size=4)]
        sentence = [words[0], f"tok{i}", words[1], words[2], words[3]]
        label = int(rng.integers(0, 2))
        pron = int(rng.integers(0, 2))
        mentions_raw.append((i % sentences_per_doc, 1, 3, label, pron))
        sentences.append(sentence)
    return _chunk_documents(sentences, mentions_raw, sentences_per_doc, doc_prefix)


def shuffle_labels(corpus: Corpus, seed: int = 0) -> Corpus:
    """Permute the labels across mentions, keeping everything else."""
    rng = np.random.default_rng(seed)
    labels = [m.label for m in corpus.mentions]
    order = rng.permutation(len(labels))
    mentions = [
        replace(m, label=labels[order[i]]) for i, m in enumerate(corpus.mentions)
    ]
    return Corpus(corpus.documents, mentions)


def scale_corpus(
    n_docs: int = 275,
    n_sentences: int = 3600,
    n_tokens: int = 78_000,
    mentions_per_doc: int = 2,
    seed: int = 0,
) -> Corpus:
    """Corpus with exactly the requested document/sentence/token counts.

    Sentences and tokens are spread as evenly as the totals allow; every
    fourth mention is a singleton.
    """
    if n_sentences < n_docs:
        raise ValueError("need at least one sentence per document")
    if n_tokens < 2 * n_sentences:
        raise ValueError("need at least two tokens per sentence to place mentions")
    rng = np.random.default_rng(seed)
    fillers = [f"tok{i}" for i in range(N_FILLERS)]

    sent_base, sent_extra = divmod(n_sentences, n_docs)
    tok_base, tok_extra = divmod(n_tokens, n_sentences)

    documents = []
    mentions = []
    sentence_no = 0
    mention_no = 0
    for d in range(n_docs):
        count = sent_base + (1 if d < sent_extra else 0)
        sentences = []
        for _ in range(count):
            length = tok_base + (1 if sentence_no < tok_extra else 0)
            sentences.append([str(w) for w in rng.choice(fillers, size=length)])
            sentence_no += 1
        doc_id = f"doc{d}"
        documents.append(Document(doc_id, sentences))
        for m in range(min(mentions_per_doc, count)):
            label = 1 if mention_no % 4 == 0 else 0
            mentions.append(LabeledMention(doc_id, m, 0, 2, label))
            mention_no += 1
    return Corpus(documents, mentions)
