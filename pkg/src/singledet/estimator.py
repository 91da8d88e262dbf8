"""Estimator facade over the classifier: fit/predict on numeric matrices.

Rows follow the layout produced by ``examples_to_matrix``:
``[mention ids | context ids | syntactic flags]``.  ``MentionEncoder``
produces such matrices from a corpus, so the two compose into the usual
transform-then-fit pipeline.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Corpus
from .embeddings import EmbeddingTable
from .features import (
    FeatureConfig,
    encode_corpus,
    examples_to_matrix,
    matrix_to_examples,
    parse_feature_groups,
)
from .model import ModelConfig, build_model
from .training import TrainConfig, train

__all__ = ["SingletonClassifier", "MentionEncoder"]


def _check_embeddings(embeddings) -> EmbeddingTable:
    if not isinstance(embeddings, EmbeddingTable):
        raise ValueError(
            f"embeddings must be an EmbeddingTable, got {type(embeddings).__name__}"
        )
    return embeddings


def _check_id_range(X: np.ndarray, n_id_columns: int, vocab_size: int) -> None:
    ids = np.asarray(X, dtype=np.float64)[:, :n_id_columns]
    top = ids.max(initial=0.0)
    if top > vocab_size:
        raise ValueError(
            f"word id {int(top)} exceeds the embedding vocabulary size {vocab_size}"
        )


class SingletonClassifier(ClassifierMixin, BaseEstimator):
    """Binary mention classifier (1 = singleton) over encoded matrices.

    All constructor arguments are hyperparameters stored verbatim;
    validation happens in ``fit``, which trains a fresh model every call.
    """

    def __init__(
        self,
        embeddings: EmbeddingTable | None = None,
        features: str = "words,context,syntactic",
        context_mode: str = "two",
        max_mention_len: int = 10,
        context_len: int = 10,
        filter_widths: tuple = (2, 3, 4),
        filters_per_width: int = 64,
        cnn_dense_out: int = 16,
        syntactic_hidden: tuple = (32, 16),
        final_hidden: tuple = (32, 8),
        dropout_rate: float = 0.2,
        epochs: int = 20,
        batch_size: int = 5,
        learning_rate: float = 0.001,
        optimizer: str = "adam",
        seed: int = 0,
    ):
        self.embeddings = embeddings
        self.features = features
        self.context_mode = context_mode
        self.max_mention_len = max_mention_len
        self.context_len = context_len
        self.filter_widths = filter_widths
        self.filters_per_width = filters_per_width
        self.cnn_dense_out = cnn_dense_out
        self.syntactic_hidden = syntactic_hidden
        self.final_hidden = final_hidden
        self.dropout_rate = dropout_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.seed = seed

    def _configs(self) -> tuple[FeatureConfig, ModelConfig, TrainConfig]:
        table = _check_embeddings(self.embeddings)
        flags = parse_feature_groups(self.features)
        feature_cfg = FeatureConfig(
            max_mention_len=self.max_mention_len,
            context_mode=self.context_mode,
            context_len=self.context_len,
            **flags,
        )
        model_cfg = ModelConfig(
            embed_dim=table.dim,
            max_mention_len=self.max_mention_len,
            context_len=self.context_len,
            filter_widths=self.filter_widths,
            filters_per_width=self.filters_per_width,
            cnn_dense_out=self.cnn_dense_out,
            syntactic_hidden=self.syntactic_hidden,
            final_hidden=self.final_hidden,
            dropout_rate=self.dropout_rate,
            seed=self.seed,
            **flags,
        )
        train_cfg = TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
            shuffle_seed=self.seed,
        )
        return feature_cfg, model_cfg, train_cfg

    def fit(self, X, y):
        feature_cfg, model_cfg, train_cfg = self._configs()
        table = self.embeddings
        X = np.asarray(X, dtype=np.float64)
        if y is None:
            raise ValueError("fit requires labels")
        examples = matrix_to_examples(X, y, feature_cfg)
        _check_id_range(X, feature_cfg.max_mention_len + feature_cfg.context_len,
                        table.vocab_size)
        model = build_model(model_cfg, table)
        self.history_ = train(model, examples, [], train_cfg)
        self.model_ = model
        self.feature_config_ = feature_cfg
        self.classes_ = np.array([0, 1], dtype=np.intp)
        self.n_features_in_ = X.shape[1]
        return self

    def _examples_for(self, X) -> list:
        check_is_fitted(self, "model_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected shape (n, {self.n_features_in_}), got {X.shape}"
            )
        examples = matrix_to_examples(X, None, self.feature_config_)
        _check_id_range(
            X,
            self.feature_config_.max_mention_len + self.feature_config_.context_len,
            self.embeddings.vocab_size,
        )
        return examples

    def predict_proba(self, X) -> np.ndarray:
        examples = self._examples_for(X)
        out = np.zeros((len(examples), 2))
        for i, ex in enumerate(examples):
            out[i] = self.model_.forward(ex, training=False)
        return out

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return (probs[:, 1] > probs[:, 0]).astype(np.intp)


class MentionEncoder(TransformerMixin, BaseEstimator):
    """Turns a corpus into the numeric matrix the classifier consumes."""

    def __init__(
        self,
        embeddings: EmbeddingTable | None = None,
        features: str = "words,context,syntactic",
        context_mode: str = "two",
        max_mention_len: int = 10,
        context_len: int = 10,
    ):
        self.embeddings = embeddings
        self.features = features
        self.context_mode = context_mode
        self.max_mention_len = max_mention_len
        self.context_len = context_len

    def _config(self) -> FeatureConfig:
        _check_embeddings(self.embeddings)
        return FeatureConfig(
            max_mention_len=self.max_mention_len,
            context_mode=self.context_mode,
            context_len=self.context_len,
            **parse_feature_groups(self.features),
        )

    def fit(self, X: Corpus, y=None):
        self.feature_config_ = self._config()
        return self

    def transform(self, X: Corpus) -> np.ndarray:
        check_is_fitted(self, "feature_config_")
        if not isinstance(X, Corpus):
            raise ValueError(f"expected a Corpus, got {type(X).__name__}")
        examples = encode_corpus(X.mentions, X, self.embeddings, self.feature_config_)
        matrix, _ = examples_to_matrix(examples, self.feature_config_)
        return matrix

    def encode(self, corpus: Corpus) -> tuple[np.ndarray, np.ndarray]:
        """Matrix and label vector for every mention in the corpus."""
        cfg = self._config()
        examples = encode_corpus(corpus.mentions, corpus, self.embeddings, cfg)
        return examples_to_matrix(examples, cfg)
