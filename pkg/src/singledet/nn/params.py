"""Trainable parameters and deterministic random streams.

All numeric state in this package is held in float64 numpy arrays.  A
``Parameter`` bundles a value with its gradient accumulator and any
per-optimizer state slots; a ``Rng`` is a seeded, forkable PCG64 stream so
that initialization, shuffling, and dropout are reproducible bit for bit
given the same seed.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Parameter", "Rng", "glorot_uniform"]


class Parameter:
    """A named trainable array with a gradient and optimizer slots.

    ``value`` and ``grad`` always share one shape; ``slots`` holds
    same-shaped accumulators (first/second moments etc.) allocated lazily
    by whichever optimizer updates the parameter.
    """

    __slots__ = ("name", "value", "grad", "slots")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.slots: dict[str, np.ndarray] = {}

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def slot(self, key: str) -> np.ndarray:
        """Return the named optimizer slot, allocating zeros on first use."""
        arr = self.slots.get(key)
        if arr is None:
            arr = np.zeros_like(self.value)
            self.slots[key] = arr
        return arr

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Parameter({self.name!r}, shape={self.value.shape})"


class Rng:
    """Seeded random stream with keyed, independent substreams.

    Wraps numpy's PCG64 generator.  ``fork(key)`` derives a child stream
    through ``SeedSequence`` spawn keys, so distinct purposes (weight init,
    shuffling, dropout) read from independent streams that depend only on
    the root seed and the fork path, never on call order elsewhere.
    """

    algorithm = "pcg64"

    def __init__(self, seed: int, _sequence: np.random.SeedSequence | None = None):
        self.seed = int(seed)
        self._sequence = _sequence if _sequence is not None else np.random.SeedSequence(self.seed)
        self._gen = np.random.Generator(np.random.PCG64(self._sequence))

    def fork(self, key: int) -> "Rng":
        child = np.random.SeedSequence(
            entropy=self._sequence.entropy,
            spawn_key=tuple(self._sequence.spawn_key) + (int(key),),
        )
        return Rng(self.seed, _sequence=child)

    def uniform(self, low: float, high: float, shape: tuple[int, ...]) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def standard_normal(self, shape: tuple[int, ...]) -> np.ndarray:
        return self._gen.standard_normal(size=shape)

    def random(self, shape: tuple[int, ...]) -> np.ndarray:
        return self._gen.random(size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low: int, high: int, size: int | tuple[int, ...] | None = None):
        return self._gen.integers(low, high, size=size)

    def choice(self, seq, size: int | None = None, replace: bool = True):
        return self._gen.choice(seq, size=size, replace=replace)


def glorot_uniform(rng: Rng, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform init in +/- sqrt(6 / (fan_in + fan_out))."""
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)
