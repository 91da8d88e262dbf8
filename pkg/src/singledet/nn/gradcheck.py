"""Finite-difference verification of analytic gradients.

The harness perturbs every coordinate of every parameter by +/- eps,
re-evaluates the scalar loss, and compares the central difference
(f(t+eps) - f(t-eps)) / (2 eps) against the analytic gradient the loss
function wrote into each parameter.  The reported figure is the worst
relative error, measured against the numeric estimate with a floor tied
to the overall gradient scale so that exactly-dead coordinates (both
gradients zero) score 0 rather than 0/0.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .params import Parameter

__all__ = ["gradient_check"]


def gradient_check(
    loss_and_grad: Callable[[], float],
    params: Sequence[Parameter],
    eps: float = 1e-5,
) -> float:
    """Return the max relative error between analytic and numeric gradients.

    ``loss_and_grad`` must be deterministic (dropout off), return the scalar
    loss, and leave each parameter's ``grad`` holding the full analytic
    gradient of that loss (it should zero grads itself before accumulating).
    """
    loss_and_grad()
    analytic = [p.grad.copy() for p in params]

    numeric = []
    for p in params:
        flat = p.value.reshape(-1)
        num = np.empty(flat.size)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = loss_and_grad()
            flat[i] = orig - eps
            f_minus = loss_and_grad()
            flat[i] = orig
            num[i] = (f_plus - f_minus) / (2.0 * eps)
        numeric.append(num.reshape(p.value.shape))

    scale = max(float(np.abs(n).max()) for n in numeric)
    floor = max(1e-12, 1e-6 * scale)
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.abs(n), floor)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst
