"""Singleton mention detection for Hindi coreference preprocessing.

A mention that belongs to no coreference chain is a singleton (label 1).
The package provides the corpus and word-vector formats, fixed-shape
mention encoding, a three-branch convolutional/dense classifier built on
hand-verified numpy kernels, a deterministic training loop, evaluation
metrics, an estimator facade, and a command-line interface.
"""

from .corpus import (
    Corpus,
    CorpusError,
    Document,
    LabeledMention,
    SplitSpec,
    corpus_stats,
    load_corpus,
    save_corpus,
    singleton_ratio,
    split,
)
from .embeddings import (
    EmbeddingError,
    EmbeddingTable,
    load_word_vectors,
    save_word_vectors,
)
from .estimator import MentionEncoder, SingletonClassifier
from .features import (
    ContextMode,
    EncodedExample,
    FeatureConfig,
    encode_corpus,
    examples_to_matrix,
    matrix_to_examples,
    parse_feature_groups,
)
from .metrics import ClassReport, f_measure, render_report, report
from .model import (
    CheckpointError,
    ModelConfig,
    SingletonModel,
    build_model,
    load_model,
    parameter_count,
    save_model,
)
from .synthetic import (
    fixture_embeddings,
    random_label_corpus,
    scale_corpus,
    separable_corpus,
    shuffle_labels,
)
from .training import (
    SweepAxis,
    TrainConfig,
    TrainHistory,
    TrainingError,
    evaluate,
    sweep,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "CorpusError",
    "Document",
    "LabeledMention",
    "SplitSpec",
    "corpus_stats",
    "load_corpus",
    "save_corpus",
    "singleton_ratio",
    "split",
    "EmbeddingError",
    "EmbeddingTable",
    "load_word_vectors",
    "save_word_vectors",
    "MentionEncoder",
    "SingletonClassifier",
    "ContextMode",
    "EncodedExample",
    "FeatureConfig",
    "encode_corpus",
    "examples_to_matrix",
    "matrix_to_examples",
    "parse_feature_groups",
    "ClassReport",
    "f_measure",
    "render_report",
    "report",
    "CheckpointError",
    "ModelConfig",
    "SingletonModel",
    "build_model",
    "load_model",
    "parameter_count",
    "save_model",
    "fixture_embeddings",
    "random_label_corpus",
    "scale_corpus",
    "separable_corpus",
    "shuffle_labels",
    "SweepAxis",
    "TrainConfig",
    "TrainHistory",
    "TrainingError",
    "evaluate",
    "sweep",
    "train",
    "__version__",
]
