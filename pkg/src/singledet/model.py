"""The three-branch singleton classifier.

Two CNN branches (mention words, context words) and one small dense branch
(syntactic flags) feed a shared dense head ending in a 2-way softmax:

    word ids    -> embed -> conv{2,3,4}x64 -> ReLU -> maxpool -> 192 -> dense 16 ReLU
    flags (3,)  -> dense 32 ReLU+drop -> dense 16 ReLU+drop
    context ids -> embed -> conv{2,3,4}x64 -> ReLU -> maxpool -> 192 -> dense 16 ReLU
    concat(word, syntactic, context) = 48 -> dense 32 ReLU+drop -> dense 8 ReLU+drop -> dense 2 -> softmax

Dropout sits after each hidden dense of the syntactic branch and head only,
never inside the CNN branches.  Disabled branches are replaced by zero
vectors of the same width, so the head's input shape never changes across
feature ablations.  Embedding rows are inputs, not parameters: they receive
no gradient and never move.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingTable
from .features import SYNTACTIC_SIZE, EncodedExample
from .nn import (
    Parameter,
    Rng,
    concat,
    concat_backward,
    conv_text,
    conv_text_backward,
    dense,
    dense_backward,
    dropout,
    dropout_backward,
    glorot_uniform,
    maxpool_over_time,
    maxpool_over_time_backward,
    relu,
    relu_backward,
    softmax,
    sparse_ce_backward,
    sparse_ce_loss,
)

__all__ = [
    "ModelConfig",
    "SingletonModel",
    "CheckpointError",
    "build_model",
    "parameter_count",
    "save_model",
    "load_model",
]

CHECKPOINT_FORMAT = "singledet-checkpoint"
CHECKPOINT_VERSION = 1

N_CLASSES = 2


class CheckpointError(ValueError):
    """Unreadable or incompatible model checkpoint."""


@dataclass
class ModelConfig:
    """Architecture hyperparameters.

    ``syntactic_hidden`` must end at ``cnn_dense_out`` so all three branch
    outputs share one width and the head input is always 3x that width.
    """

    embed_dim: int = 300
    max_mention_len: int = 10
    context_len: int = 10
    filter_widths: tuple[int, ...] = (2, 3, 4)
    filters_per_width: int = 64
    cnn_dense_out: int = 16
    syntactic_hidden: tuple[int, ...] = (32, 16)
    final_hidden: tuple[int, ...] = (32, 8)
    classes: int = 2
    dropout_rate: float = 0.2
    use_words: bool = True
    use_context: bool = True
    use_syntactic: bool = True
    seed: int = 0

    def __post_init__(self):
        self.filter_widths = tuple(int(w) for w in self.filter_widths)
        self.syntactic_hidden = tuple(int(w) for w in self.syntactic_hidden)
        self.final_hidden = tuple(int(w) for w in self.final_hidden)
        if self.classes != N_CLASSES:
            raise ValueError(f"this classifier is strictly 2-way, got classes={self.classes}")
        for name in ("embed_dim", "max_mention_len", "context_len", "filters_per_width", "cnn_dense_out"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.filter_widths or min(self.filter_widths) <= 0:
            raise ValueError("filter_widths must be positive integers")
        limit = min(self.max_mention_len, self.context_len)
        if max(self.filter_widths) > limit:
            raise ValueError(
                f"filter width {max(self.filter_widths)} exceeds shortest input length {limit}"
            )
        if not self.syntactic_hidden or not self.final_hidden:
            raise ValueError("hidden layer lists must be non-empty")
        if self.syntactic_hidden[-1] != self.cnn_dense_out:
            raise ValueError(
                f"syntactic branch must end at width {self.cnn_dense_out} to match the CNN branches, "
                f"got {self.syntactic_hidden[-1]}"
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if not (self.use_words or self.use_context or self.use_syntactic):
            raise ValueError("at least one branch must be enabled")


def parameter_count(cfg: ModelConfig) -> int:
    """Closed-form count of trainable scalars for a config."""
    f = cfg.filters_per_width
    branch = sum(k * cfg.embed_dim * f + f for k in cfg.filter_widths)
    branch += len(cfg.filter_widths) * f * cfg.cnn_dense_out + cfg.cnn_dense_out
    syn = 0
    prev = SYNTACTIC_SIZE
    for width in cfg.syntactic_hidden:
        syn += prev * width + width
        prev = width
    head = 0
    prev = 3 * cfg.cnn_dense_out
    for width in cfg.final_hidden:
        head += prev * width + width
        prev = width
    head += prev * cfg.classes + cfg.classes
    return 2 * branch + syn + head


@dataclass
class SingletonModel:
    """Built parameters plus the frozen embedding table they were sized for."""

    config: ModelConfig
    table: EmbeddingTable
    params: dict[str, Parameter] = field(repr=False)

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def zero_grads(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    # -- forward -----------------------------------------------------------

    def _check_example(self, ex: EncodedExample) -> None:
        cfg = self.config
        if len(ex.mention_ids) != cfg.max_mention_len:
            raise ValueError(
                f"mention_ids has length {len(ex.mention_ids)}, expected {cfg.max_mention_len}"
            )
        if len(ex.context_ids) != cfg.context_len:
            raise ValueError(
                f"context_ids has length {len(ex.context_ids)}, expected {cfg.context_len}"
            )
        if len(ex.syntactic) != SYNTACTIC_SIZE:
            raise ValueError(f"syntactic vector has length {len(ex.syntactic)}, expected 3")
        top = self.table.vocab_size
        for ids in (ex.mention_ids, ex.context_ids):
            for i in ids:
                if not 0 <= i <= top:
                    raise ValueError(f"token id {i} outside vocabulary range [0, {top}]")

    def _branch_forward(self, prefix: str, ids) -> tuple[np.ndarray, dict]:
        cfg = self.config
        E = self.table.rows(ids)
        pools, convs = [], []
        for k in cfg.filter_widths:
            c = conv_text(
                E,
                self.params[f"{prefix}.conv{k}.filters"].value,
                self.params[f"{prefix}.conv{k}.bias"].value,
            )
            r = relu(c)
            pools.append(maxpool_over_time(r))
            convs.append((c, r))
        z = concat(pools)
        pre = dense(z, self.params[f"{prefix}.dense.w"].value, self.params[f"{prefix}.dense.b"].value)
        return relu(pre), {"E": E, "convs": convs, "z": z, "pre": pre}

    def _dense_stack_forward(
        self, prefix: str, x: np.ndarray, n_layers: int, training: bool, rng: Rng | None
    ) -> tuple[np.ndarray, list]:
        cache = []
        h = x
        for i in range(n_layers):
            pre = dense(h, self.params[f"{prefix}.h{i}.w"].value, self.params[f"{prefix}.h{i}.b"].value)
            r = relu(pre)
            out, mask = dropout(r, self.config.dropout_rate, rng, training)
            cache.append((h, pre, mask))
            h = out
        return h, cache

    def _forward_cached(self, ex: EncodedExample, training: bool, rng: Rng | None) -> tuple[np.ndarray, dict]:
        self._check_example(ex)
        cfg = self.config
        width = cfg.cnn_dense_out
        cache: dict = {}

        if cfg.use_words:
            word_out, cache["word"] = self._branch_forward("word", ex.mention_ids)
        else:
            word_out = np.zeros(width)
        if cfg.use_syntactic:
            syn_in = np.asarray(ex.syntactic, dtype=np.float64)
            syn_out, cache["syn"] = self._dense_stack_forward(
                "syn", syn_in, len(cfg.syntactic_hidden), training, rng
            )
        else:
            syn_out = np.zeros(width)
        if cfg.use_context:
            ctx_out, cache["context"] = self._branch_forward("context", ex.context_ids)
        else:
            ctx_out = np.zeros(width)

        x = concat([word_out, syn_out, ctx_out])
        h, cache["head"] = self._dense_stack_forward("head", x, len(cfg.final_hidden), training, rng)
        logits = dense(h, self.params["head.out.w"].value, self.params["head.out.b"].value)
        probs = softmax(logits)
        cache["head_in"] = x
        cache["head_top"] = h
        cache["probs"] = probs
        return probs, cache

    def forward(self, ex: EncodedExample, training: bool = False, rng: Rng | None = None) -> np.ndarray:
        """Class probabilities (p_nonsingleton, p_singleton) for one example."""
        probs, _ = self._forward_cached(ex, training, rng)
        return probs

    def predict(self, ex: EncodedExample) -> int:
        """Most likely class; an exact tie goes to class 0 (non-singleton)."""
        probs = self.forward(ex, training=False)
        return int(probs[1] > probs[0])

    # -- backward ----------------------------------------------------------

    def _accumulate(self, name: str, grad: np.ndarray, scale: float) -> None:
        self.params[name].grad += scale * grad

    def _branch_backward(self, prefix: str, grad: np.ndarray, cache: dict, scale: float) -> None:
        cfg = self.config
        dpre = relu_backward(grad, cache["pre"])
        dz, dw, db = dense_backward(dpre, cache["z"], self.params[f"{prefix}.dense.w"].value)
        self._accumulate(f"{prefix}.dense.w", dw, scale)
        self._accumulate(f"{prefix}.dense.b", db, scale)
        dpools = concat_backward(dz, [cfg.filters_per_width] * len(cfg.filter_widths))
        for k, (c, r), dpool in zip(cfg.filter_widths, cache["convs"], dpools):
            dr = maxpool_over_time_backward(dpool, r)
            dc = relu_backward(dr, c)
            _, dfilters, dbias = conv_text_backward(dc, cache["E"], self.params[f"{prefix}.conv{k}.filters"].value)
            self._accumulate(f"{prefix}.conv{k}.filters", dfilters, scale)
            self._accumulate(f"{prefix}.conv{k}.bias", dbias, scale)

    def _dense_stack_backward(self, prefix: str, grad: np.ndarray, cache: list, scale: float) -> np.ndarray:
        rate = self.config.dropout_rate
        for i in reversed(range(len(cache))):
            h_in, pre, mask = cache[i]
            g = dropout_backward(grad, mask, rate)
            g = relu_backward(g, pre)
            dx, dw, db = dense_backward(g, h_in, self.params[f"{prefix}.h{i}.w"].value)
            self._accumulate(f"{prefix}.h{i}.w", dw, scale)
            self._accumulate(f"{prefix}.h{i}.b", db, scale)
            grad = dx
        return grad

    def accumulate_loss_gradient(
        self, ex: EncodedExample, scale: float = 1.0, training: bool = True, rng: Rng | None = None
    ) -> tuple[float, np.ndarray]:
        """Add scale x d(loss)/d(param) into every parameter's grad.

        Runs one forward/backward pass on the example against its own label
        and returns the (unscaled) cross-entropy loss together with the
        class probabilities from that same pass.  Callers zero grads and
        choose ``scale`` (1/batch_size for a mean batch gradient).
        """
        cfg = self.config
        probs, cache = self._forward_cached(ex, training, rng)
        loss = sparse_ce_loss(probs, ex.label)

        dlogits = sparse_ce_backward(probs, ex.label)
        dh, dw, db = dense_backward(dlogits, cache["head_top"], self.params["head.out.w"].value)
        self._accumulate("head.out.w", dw, scale)
        self._accumulate("head.out.b", db, scale)
        dx = self._dense_stack_backward("head", dh, cache["head"], scale)

        width = cfg.cnn_dense_out
        dword, dsyn, dctx = concat_backward(dx, [width, width, width])
        if cfg.use_words:
            self._branch_backward("word", dword, cache["word"], scale)
        if cfg.use_syntactic:
            self._dense_stack_backward("syn", dsyn, cache["syn"], scale)
        if cfg.use_context:
            self._branch_backward("context", dctx, cache["context"], scale)
        return loss, probs


def _init_dense(params: dict, rng: Rng, prefix: str, n_in: int, n_out: int) -> None:
    params[f"{prefix}.w"] = Parameter(
        f"{prefix}.w", glorot_uniform(rng, (n_in, n_out), n_in, n_out)
    )
    params[f"{prefix}.b"] = Parameter(f"{prefix}.b", np.zeros(n_out))


def build_model(cfg: ModelConfig, table: EmbeddingTable, rng: Rng | None = None) -> SingletonModel:
    """Allocate and initialize all parameters for a config.

    Every branch is allocated whether or not it is enabled, in one fixed
    order from one seeded stream, so two configs differing only in ``use_*``
    flags draw identical weights for the parts they share.  Weights are
    Glorot-uniform, biases zero.
    """
    if table.dim != cfg.embed_dim:
        raise ValueError(f"embedding table dim {table.dim} != config embed_dim {cfg.embed_dim}")
    if rng is None:
        rng = Rng(cfg.seed)
    rng = rng.fork(0)

    params: dict[str, Parameter] = {}
    f = cfg.filters_per_width
    for prefix in ("word", "context"):
        for k in cfg.filter_widths:
            name = f"{prefix}.conv{k}.filters"
            params[name] = Parameter(
                name, glorot_uniform(rng, (k, cfg.embed_dim, f), k * cfg.embed_dim, f)
            )
            params[f"{prefix}.conv{k}.bias"] = Parameter(f"{prefix}.conv{k}.bias", np.zeros(f))
        _init_dense(params, rng, f"{prefix}.dense", len(cfg.filter_widths) * f, cfg.cnn_dense_out)

    prev = SYNTACTIC_SIZE
    for i, width in enumerate(cfg.syntactic_hidden):
        _init_dense(params, rng, f"syn.h{i}", prev, width)
        prev = width

    prev = 3 * cfg.cnn_dense_out
    for i, width in enumerate(cfg.final_hidden):
        _init_dense(params, rng, f"head.h{i}", prev, width)
        prev = width
    _init_dense(params, rng, "head.out", prev, cfg.classes)

    model = SingletonModel(cfg, table, params)
    _assert_shape_trace(model)
    return model


def _assert_shape_trace(model: SingletonModel) -> None:
    """Walk the documented shape trace and compare against allocations."""
    cfg = model.config
    f = cfg.filters_per_width
    for prefix, length in (("word", cfg.max_mention_len), ("context", cfg.context_len)):
        for k in cfg.filter_widths:
            assert length - k + 1 >= 1
            assert model.params[f"{prefix}.conv{k}.filters"].shape == (k, cfg.embed_dim, f)
        assert model.params[f"{prefix}.dense.w"].shape == (len(cfg.filter_widths) * f, cfg.cnn_dense_out)
    assert model.params["head.h0.w"].shape[0] == 3 * cfg.cnn_dense_out
    assert model.params["head.out.w"].shape == (cfg.final_hidden[-1], cfg.classes)
    assert model.num_parameters() == parameter_count(cfg)


def save_model(model: SingletonModel, path: str | Path) -> None:
    """Write config and parameters as JSON; float64 round-trips bitwise."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "params": {
            name: {"shape": list(p.shape), "data": p.value.reshape(-1).tolist()}
            for name, p in model.params.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path: str | Path, table: EmbeddingTable) -> SingletonModel:
    """Rebuild a saved model against an embedding table of matching width."""
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {payload.get('version')} unsupported (expected {CHECKPOINT_VERSION})"
        )
    try:
        cfg = ModelConfig(**payload["config"])
        stored = payload["params"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    if table.dim != cfg.embed_dim:
        raise CheckpointError(
            f"checkpoint expects embedding dim {cfg.embed_dim}, table has {table.dim}"
        )
    model = build_model(cfg, table)
    if set(stored) != set(model.params):
        raise CheckpointError("checkpoint parameter names do not match the architecture")
    for name, p in model.params.items():
        entry = stored[name]
        if tuple(entry["shape"]) != p.shape:
            raise CheckpointError(
                f"parameter {name!r} has shape {tuple(entry['shape'])}, expected {p.shape}"
            )
        data = np.asarray(entry["data"], dtype=np.float64)
        if data.size != p.size:
            raise CheckpointError(f"parameter {name!r} has {data.size} values, expected {p.size}")
        p.value[...] = data.reshape(p.shape)
    return model
