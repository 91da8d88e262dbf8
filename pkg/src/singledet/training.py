"""Mini-batch training loop, evaluation, and one-axis sweeps."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .corpus import Corpus, SplitSpec, split as split_corpus
from .embeddings import EmbeddingTable
from .features import EncodedExample, FeatureConfig, encode_corpus, parse_feature_groups
from .metrics import report
from .model import ModelConfig, SingletonModel, build_model
from .nn import NonFiniteGradientError, Rng, make_optimizer, sparse_ce_loss

log = logging.getLogger(__name__)

__all__ = [
    "TrainConfig",
    "EpochRecord",
    "TrainHistory",
    "TrainingError",
    "train",
    "evaluate",
    "SweepAxis",
    "SweepRow",
    "sweep",
]


class TrainingError(RuntimeError):
    """Raised when a run cannot continue; carries epoch/batch context."""


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 5
    learning_rate: float = 0.001
    optimizer: str = "adam"
    shuffle_seed: int = 0
    dropout_enabled: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)
    optimizer_steps: int = 0

    @property
    def final(self) -> EpochRecord:
        if not self.records:
            raise ValueError("history is empty")
        return self.records[-1]

    def save_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
            for r in self.records:
                writer.writerow(
                    [r.epoch, repr(r.train_loss), repr(r.train_accuracy),
                     repr(r.val_loss), repr(r.val_accuracy)]
                )


def evaluate(
    model: SingletonModel, data: Sequence[EncodedExample]
) -> tuple[float, list[int]]:
    """Mean loss and predictions with dropout off; does not touch grads."""
    if not data:
        return 0.0, []
    total = 0.0
    preds = []
    for ex in data:
        probs = model.forward(ex, training=False)
        total += sparse_ce_loss(probs, ex.label)
        preds.append(int(probs[1] > probs[0]))
    return total / len(data), preds


def train(
    model: SingletonModel,
    train_set: Sequence[EncodedExample],
    val_set: Sequence[EncodedExample],
    cfg: TrainConfig,
) -> TrainHistory:
    """Mini-batch gradient descent over ``train_set``.

    One optimizer step per batch on the mean batch gradient.  Training
    accuracy comes from the same passes that produce the gradients, so
    with dropout enabled it reflects the dropped network.  Shuffling and
    dropout draw from independent streams forked off ``shuffle_seed``;
    two runs with equal seeds and inputs produce identical parameters.
    """
    if not train_set:
        raise TrainingError("training set is empty")
    opt = make_optimizer(cfg.optimizer, cfg.learning_rate)
    root = Rng(cfg.shuffle_seed)
    shuffle_rng = root.fork(1)
    dropout_root = root.fork(2)
    history = TrainHistory()
    n = len(train_set)
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n)
        dropout_rng = dropout_root.fork(epoch)
        epoch_loss = 0.0
        epoch_correct = 0
        for batch_no, lo in enumerate(range(0, n, cfg.batch_size)):
            batch = [train_set[i] for i in order[lo : lo + cfg.batch_size]]
            model.zero_grads()
            batch_rng = dropout_rng.fork(batch_no)
            try:
                for ex in batch:
                    loss, probs = model.accumulate_loss_gradient(
                        ex,
                        scale=1.0 / len(batch),
                        training=cfg.dropout_enabled,
                        rng=batch_rng,
                    )
                    epoch_loss += loss
                    epoch_correct += int(int(probs[1] > probs[0]) == ex.label)
                opt.step(model.parameters())
            except NonFiniteGradientError as err:
                raise TrainingError(
                    f"non-finite gradient at epoch {epoch} batch {batch_no}: {err}"
                ) from err
            history.optimizer_steps += 1
        val_loss, val_preds = evaluate(model, val_set)
        val_acc = (
            sum(int(p == ex.label) for p, ex in zip(val_preds, val_set)) / len(val_set)
            if val_set
            else 0.0
        )
        record = EpochRecord(
            epoch=epoch,
            train_loss=epoch_loss / n,
            train_accuracy=epoch_correct / n,
            val_loss=val_loss,
            val_accuracy=val_acc,
        )
        history.records.append(record)
        log.info(
            "epoch %d/%d train_loss=%.4f train_acc=%.4f val_loss=%.4f val_acc=%.4f",
            epoch, cfg.epochs, record.train_loss, record.train_accuracy,
            record.val_loss, record.val_accuracy,
        )
    return history


class SweepAxis(str, Enum):
    OPTIMIZER = "optimizer"
    EPOCHS = "epochs"
    CONTEXT_MODE = "context_mode"
    FEATURES = "features"


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: str
    val_loss: float
    val_accuracy: float
    singleton_f1: float


def _apply_axis(
    axis: SweepAxis,
    value: str,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    feature_cfg: FeatureConfig,
) -> tuple[ModelConfig, TrainConfig, FeatureConfig]:
    if axis is SweepAxis.OPTIMIZER:
        return model_cfg, replace(train_cfg, optimizer=value), feature_cfg
    if axis is SweepAxis.EPOCHS:
        return model_cfg, replace(train_cfg, epochs=int(value)), feature_cfg
    if axis is SweepAxis.CONTEXT_MODE:
        return model_cfg, train_cfg, replace(feature_cfg, context_mode=value)
    flags = parse_feature_groups(value)
    return replace(model_cfg, **flags), train_cfg, replace(feature_cfg, **flags)


def sweep(
    corpus: Corpus,
    table: EmbeddingTable,
    axis: SweepAxis | str,
    values: Sequence[str],
    model_cfg: ModelConfig | None = None,
    train_cfg: TrainConfig | None = None,
    feature_cfg: FeatureConfig | None = None,
    split_spec: SplitSpec | None = None,
) -> list[SweepRow]:
    """Train one fresh model per value of a single axis; compare on the
    validation split.  The document split is fixed across the whole sweep.
    """
    axis = SweepAxis(axis)
    if not values:
        raise ValueError("sweep needs at least one value")
    model_cfg = model_cfg if model_cfg is not None else ModelConfig()
    train_cfg = train_cfg if train_cfg is not None else TrainConfig()
    feature_cfg = feature_cfg if feature_cfg is not None else FeatureConfig(
        max_mention_len=model_cfg.max_mention_len, context_len=model_cfg.context_len
    )
    split_spec = split_spec if split_spec is not None else SplitSpec()
    train_m, val_m, _ = split_corpus(corpus, split_spec)
    rows = []
    for value in values:
        m_cfg, t_cfg, f_cfg = _apply_axis(axis, str(value), model_cfg, train_cfg, feature_cfg)
        train_set = encode_corpus(train_m, corpus, table, f_cfg)
        val_set = encode_corpus(val_m, corpus, table, f_cfg)
        model = build_model(m_cfg, table)
        history = train(model, train_set, val_set, t_cfg)
        _, preds = evaluate(model, val_set)
        rep = report(preds, [ex.label for ex in val_set])
        rows.append(
            SweepRow(
                axis=axis.value,
                value=str(value),
                val_loss=history.final.val_loss,
                val_accuracy=rep.accuracy,
                singleton_f1=rep.per_class[1].f_measure,
            )
        )
        log.info(
            "sweep %s=%s val_loss=%.4f val_acc=%.4f singleton_f1=%.4f",
            axis.value, value, rows[-1].val_loss, rows[-1].val_accuracy,
            rows[-1].singleton_f1,
        )
    return rows
