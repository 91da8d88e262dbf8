"""From-scratch neural kernels: ops with hand-derived backward passes,
parameters, optimizers, and a finite-difference gradient checker.

Tensors throughout are float64 numpy arrays; an array's shape plus its
row-major buffer is the whole representation.
"""

from .gradcheck import gradient_check
from .optim import (
    OPTIMIZER_KINDS,
    Adadelta,
    Adagrad,
    Adam,
    NonFiniteGradientError,
    Optimizer,
    RMSProp,
    make_optimizer,
)
from .ops import (
    concat,
    concat_backward,
    conv_text,
    conv_text_backward,
    dense,
    dense_backward,
    dropout,
    dropout_backward,
    maxpool_over_time,
    maxpool_over_time_backward,
    relu,
    relu_backward,
    softmax,
    softmax_backward,
    sparse_ce_backward,
    sparse_ce_loss,
)
from .params import Parameter, Rng, glorot_uniform

__all__ = [
    "Parameter",
    "Rng",
    "glorot_uniform",
    "gradient_check",
    "make_optimizer",
    "NonFiniteGradientError",
    "Optimizer",
    "Adam",
    "RMSProp",
    "Adagrad",
    "Adadelta",
    "OPTIMIZER_KINDS",
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
