"""Gradient-descent update rules: Adam, RMSProp, Adagrad, Adadelta.

Each optimizer applies its standard published recurrence in place on a list
of Parameters, keeping its accumulators in the parameters' slot storage.
A non-finite gradient is a hard error.
"""

from __future__ import annotations

import numpy as np

from .params import Parameter

__all__ = [
    "Optimizer",
    "Adam",
    "RMSProp",
    "Adagrad",
    "Adadelta",
    "NonFiniteGradientError",
    "make_optimizer",
    "OPTIMIZER_KINDS",
]


class NonFiniteGradientError(ValueError):
    """A parameter gradient contained NaN or Inf."""


class Optimizer:
    """Base class: counts steps and dispatches per-parameter updates."""

    kind = "base"

    def __init__(self, lr: float):
        if lr <= 0.0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.lr = float(lr)
        self.t = 0

    def step(self, params: list[Parameter]) -> None:
        """Apply one update to every parameter from its current gradient."""
        self.t += 1
        for p in params:
            if not np.isfinite(p.grad).all():
                raise NonFiniteGradientError(
                    f"non-finite gradient in parameter {p.name!r} at step {self.t}"
                )
            self._update(p)

    def _update(self, p: Parameter) -> None:
        raise NotImplementedError


class Adam(Optimizer):
    """m, v moment estimates with bias correction (beta1=0.9, beta2=0.999)."""

    kind = "adam"

    def __init__(self, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        super().__init__(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    def _update(self, p: Parameter) -> None:
        m = p.slot("adam_m")
        v = p.slot("adam_v")
        m *= self.beta1
        m += (1.0 - self.beta1) * p.grad
        v *= self.beta2
        v += (1.0 - self.beta2) * p.grad**2
        m_hat = m / (1.0 - self.beta1**self.t)
        v_hat = v / (1.0 - self.beta2**self.t)
        p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class RMSProp(Optimizer):
    """Running mean of squared gradients (rho=0.9) scaling the step."""

    kind = "rmsprop"

    def __init__(self, lr: float = 0.001, rho: float = 0.9, eps: float = 1e-8):
        super().__init__(lr)
        self.rho = rho
        self.eps = eps

    def _update(self, p: Parameter) -> None:
        v = p.slot("rms_v")
        v *= self.rho
        v += (1.0 - self.rho) * p.grad**2
        p.value -= self.lr * p.grad / (np.sqrt(v) + self.eps)


class Adagrad(Optimizer):
    """Per-coordinate step scaled by accumulated squared gradients."""

    kind = "adagrad"

    def __init__(self, lr: float = 0.001, eps: float = 1e-8):
        super().__init__(lr)
        self.eps = eps

    def _update(self, p: Parameter) -> None:
        acc = p.slot("adagrad_acc")
        acc += p.grad**2
        p.value -= self.lr * p.grad / (np.sqrt(acc) + self.eps)


class Adadelta(Optimizer):
    """Decaying averages of squared gradients and squared updates.

    The original method has no learning rate; here ``lr`` multiplies the
    adaptive step (set lr=1 to recover it exactly).  rho=0.95, eps=1e-6.
    """

    kind = "adadelta"

    def __init__(self, lr: float = 0.001, rho: float = 0.95, eps: float = 1e-6):
        super().__init__(lr)
        self.rho = rho
        self.eps = eps

    def _update(self, p: Parameter) -> None:
        eg = p.slot("adadelta_eg")
        ed = p.slot("adadelta_ed")
        eg *= self.rho
        eg += (1.0 - self.rho) * p.grad**2
        delta = -np.sqrt(ed + self.eps) / np.sqrt(eg + self.eps) * p.grad
        ed *= self.rho
        ed += (1.0 - self.rho) * delta**2
        p.value += self.lr * delta


_REGISTRY: dict[str, type[Optimizer]] = {
    "adam": Adam,
    "rmsprop": RMSProp,
    "adagrad": Adagrad,
    "adadelta": Adadelta,
}

OPTIMIZER_KINDS = tuple(_REGISTRY)


def make_optimizer(kind: str, lr: float = 0.001) -> Optimizer:
    """Build the optimizer named by ``kind`` with its per-kind defaults."""
    try:
        cls = _REGISTRY[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown optimizer {kind!r}; expected one of {sorted(_REGISTRY)}") from None
    return cls(lr=lr)
