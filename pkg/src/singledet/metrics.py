"""Per-class precision/recall/F and accuracy for binary predictions.

Each class is scored treating it as the positive class.  A zero
denominator yields 0.0 plus an ``undefined`` flag in the report instead of
NaN, so reports stay total.  Raw values are kept at full precision;
rendering rounds to integer percentages (accuracy to two decimals).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "ConfusionCounts",
    "ClassMetrics",
    "ClassReport",
    "confusion",
    "precision",
    "recall",
    "f_measure",
    "accuracy",
    "report",
    "percent",
    "render_report",
]

CLASS_NAMES = ("Non-Singleton", "Singleton")


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-class true/false positives and misses; index by class 0 or 1."""

    tp: tuple[int, int]
    fp: tuple[int, int]
    fn: tuple[int, int]
    total: int
    correct: int


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f_measure: float
    precision_undefined: bool = False
    recall_undefined: bool = False


@dataclass(frozen=True)
class ClassReport:
    """Both classes' metrics plus overall accuracy."""

    per_class: tuple[ClassMetrics, ClassMetrics]
    accuracy: float
    beta: float = 1.0


def _check_pair(preds: Sequence[int], gold: Sequence[int]) -> None:
    if len(preds) != len(gold):
        raise ValueError(f"got {len(preds)} predictions for {len(gold)} gold labels")
    if not gold:
        raise ValueError("cannot score an empty prediction list")
    for seq, name in ((preds, "predictions"), (gold, "gold labels")):
        if any(v not in (0, 1) for v in seq):
            raise ValueError(f"{name} must all be 0 or 1")


def confusion(preds: Sequence[int], gold: Sequence[int]) -> ConfusionCounts:
    """Exact per-class counts, each class viewed as positive in turn."""
    _check_pair(preds, gold)
    tp = [0, 0]
    fp = [0, 0]
    fn = [0, 0]
    correct = 0
    for p, g in zip(preds, gold):
        if p == g:
            correct += 1
            tp[g] += 1
        else:
            fp[p] += 1
            fn[g] += 1
    return ConfusionCounts((tp[0], tp[1]), (fp[0], fp[1]), (fn[0], fn[1]), len(gold), correct)


def precision(counts: ConfusionCounts, cls: int) -> float:
    """tp / (tp + fp); 0.0 when the class was never predicted."""
    denom = counts.tp[cls] + counts.fp[cls]
    return counts.tp[cls] / denom if denom else 0.0


def recall(counts: ConfusionCounts, cls: int) -> float:
    """tp / (tp + fn); 0.0 when the class never occurs in gold."""
    denom = counts.tp[cls] + counts.fn[cls]
    return counts.tp[cls] / denom if denom else 0.0


def f_measure(p: float, r: float, beta: float = 1.0) -> float:
    """Weighted harmonic mean (1+b^2)pr / (b^2 p + r); 0 on zero denominator."""
    if not 0.0 <= p <= 1.0 or not 0.0 <= r <= 1.0:
        raise ValueError(f"precision and recall must lie in [0,1], got p={p}, r={r}")
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    denom = beta * beta * p + r
    return (1.0 + beta * beta) * p * r / denom if denom else 0.0


def accuracy(preds: Sequence[int], gold: Sequence[int]) -> float:
    """Fraction of positions where prediction equals gold."""
    _check_pair(preds, gold)
    return sum(1 for p, g in zip(preds, gold) if p == g) / len(gold)


def report(preds: Sequence[int], gold: Sequence[int], beta: float = 1.0) -> ClassReport:
    """Score both classes and overall accuracy in one pass."""
    counts = confusion(preds, gold)
    per_class = []
    for cls in (0, 1):
        p = precision(counts, cls)
        r = recall(counts, cls)
        per_class.append(
            ClassMetrics(
                precision=p,
                recall=r,
                f_measure=f_measure(p, r, beta),
                precision_undefined=counts.tp[cls] + counts.fp[cls] == 0,
                recall_undefined=counts.tp[cls] + counts.fn[cls] == 0,
            )
        )
    return ClassReport((per_class[0], per_class[1]), counts.correct / counts.total, beta)


def percent(x: float) -> str:
    """Display rounding for report tables: raw value to integer percent."""
    return str(round(x * 100))


def render_report(rep: ClassReport, class_names: tuple[str, str] = CLASS_NAMES) -> str:
    """Integer-percent table, one row per class, plus accuracy."""
    width = max(len(n) for n in class_names)
    lines = [f"{'':{width}}  Precision  Recall  F-measure"]
    for name, m in zip(class_names, rep.per_class):
        note = " (undefined)" if m.precision_undefined or m.recall_undefined else ""
        lines.append(
            f"{name:{width}}  {percent(m.precision):>9}  {percent(m.recall):>6}  {percent(m.f_measure):>9}{note}"
        )
    lines.append(f"Accuracy: {rep.accuracy * 100:.2f}%")
    return "\n".join(lines)
