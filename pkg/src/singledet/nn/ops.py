"""Forward/backward kernels for the classifier network.

Every operation here is a plain function over float64 numpy arrays with an
explicit hand-derived backward companion, so the whole stack can be checked
against central finite differences.  Conventions:

* ``relu`` uses subgradient 0 at exactly 0.
* ``maxpool_over_time`` routes gradient to the first (lowest-index) argmax
  row of each column.
* ``dropout`` is inverted: survivors are scaled by 1/(1-rate) at train
  time, so evaluation is an exact identity.
* ``sparse_ce_loss`` expects a softmax output; the backward companion
  returns the combined softmax-plus-cross-entropy gradient with respect to
  the pre-softmax logits, probs - onehot(label).
"""

from __future__ import annotations

import numpy as np

from .params import Rng

__all__ = [
    "relu",
    "relu_backward",
    "softmax",
    "softmax_backward",
    "dense",
    "dense_backward",
    "conv_text",
    "conv_text_backward",
    "maxpool_over_time",
    "maxpool_over_time_backward",
    "dropout",
    "dropout_backward",
    "concat",
    "concat_backward",
    "sparse_ce_loss",
    "sparse_ce_backward",
]

# Floor applied to predicted probabilities inside the loss so that a
# confident wrong prediction yields a large finite loss, never inf.
PROB_FLOOR = 1e-12


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(x, 0)."""
    return np.maximum(x, 0.0)


def relu_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Pass gradient where x > 0, zero elsewhere (including x == 0)."""
    return np.where(x > 0.0, grad_out, 0.0)


def softmax(z: np.ndarray) -> np.ndarray:
    """Stable softmax of a rank-1 vector: exp(z - max z) normalized."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max()
    e = np.exp(shifted)
    return e / e.sum()


def softmax_backward(grad_out: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product of softmax: p * (g - g.p)."""
    dot = float(grad_out @ probs)
    return probs * (grad_out - dot)


def dense(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map y = x @ w + b for a rank-1 input."""
    return x @ w + b


def dense_backward(
    grad_out: np.ndarray, x: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dw, db) of the affine map."""
    dx = w @ grad_out
    dw = np.outer(x, grad_out)
    db = grad_out.copy()
    return dx, dw, db


def conv_text(x: np.ndarray, filters: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Full-width text convolution.

    ``x`` is an (L, d) token-embedding matrix and ``filters`` a stack of
    shape (k, d, F): each of the F filters spans all d embedding columns
    and slides along the L axis with stride 1 and no padding.

        out[t, f] = sum_{i<k, j<d} x[t+i, j] * filters[i, j, f] + bias[f]

    Activation is the caller's job.  Raises ValueError when L < k.
    """
    L, d = x.shape
    k, d_f, n_filters = filters.shape
    if d_f != d:
        raise ValueError(f"filter depth {d_f} does not match input depth {d}")
    if L < k:
        raise ValueError(f"input length {L} shorter than filter width {k}")
    out = np.tile(bias, (L - k + 1, 1))
    for i in range(k):
        out += x[i : i + L - k + 1] @ filters[i]
    return out


def conv_text_backward(
    grad_out: np.ndarray, x: np.ndarray, filters: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dfilters, dbias) of conv_text."""
    L, _ = x.shape
    k = filters.shape[0]
    n_windows = L - k + 1
    dx = np.zeros_like(x)
    dfilters = np.empty_like(filters)
    for i in range(k):
        rows = x[i : i + n_windows]
        dfilters[i] = rows.T @ grad_out
        dx[i : i + n_windows] += grad_out @ filters[i].T
    dbias = grad_out.sum(axis=0)
    return dx, dfilters, dbias


def maxpool_over_time(x: np.ndarray) -> np.ndarray:
    """Column-wise maximum of a (T, F) matrix, yielding an F-vector."""
    return x.max(axis=0)


def maxpool_over_time_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Route each column's gradient to its first argmax row."""
    rows = np.argmax(x, axis=0)
    dx = np.zeros_like(x)
    dx[rows, np.arange(x.shape[1])] = grad_out
    return dx


def dropout(
    x: np.ndarray, rate: float, rng: Rng | None, training: bool
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout.

    Returns ``(y, mask)``.  At evaluation time (or rate 0) the output is
    ``x`` itself and the mask is None.  At train time each element
    survives with probability 1-rate and survivors are scaled by
    1/(1-rate); the boolean mask must be handed back to
    ``dropout_backward``.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError("training-mode dropout needs an Rng")
    mask = rng.random(x.shape) >= rate
    return x * mask / (1.0 - rate), mask


def dropout_backward(grad_out: np.ndarray, mask: np.ndarray | None, rate: float) -> np.ndarray:
    if mask is None:
        return grad_out
    return grad_out * mask / (1.0 - rate)


def concat(xs: list[np.ndarray]) -> np.ndarray:
    """Concatenate rank-1 vectors."""
    if not xs:
        raise ValueError("concat of an empty list")
    return np.concatenate(xs)


def concat_backward(grad_out: np.ndarray, lengths: list[int]) -> list[np.ndarray]:
    """Split an upstream gradient back into per-input segments."""
    out = []
    offset = 0
    for n in lengths:
        out.append(grad_out[offset : offset + n].copy())
        offset += n
    return out


def sparse_ce_loss(probs: np.ndarray, label: int) -> float:
    """-ln probs[label], with the probability floored at 1e-12."""
    if not 0 <= label < probs.shape[0]:
        raise ValueError(f"label {label} out of range for {probs.shape[0]} classes")
    return float(-np.log(max(float(probs[label]), PROB_FLOOR)))


def sparse_ce_backward(probs: np.ndarray, label: int) -> np.ndarray:
    """Combined softmax + cross-entropy gradient w.r.t. logits: p - onehot."""
    if not 0 <= label < probs.shape[0]:
        raise ValueError(f"label {label} out of range for {probs.shape[0]} classes")
    grad = probs.copy()
    grad[label] -= 1.0
    return grad
