"""
Confusion counts and the derived classification metrics.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from mvtpmsvm.exceptions import InvalidArgumentError


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts of a binary confusion matrix with +1 as the positive class."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class MetricSet:
    """
    Metrics of one evaluation.

    ``None`` marks a metric whose denominator is zero.
    """

    accuracy: float
    sensitivity: Optional[float]
    precision: Optional[float]
    specificity: Optional[float]
    error_rate: float

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "precision": self.precision,
            "specificity": self.specificity,
            "error_rate": self.error_rate,
        }


def confusion_counts(y_true, y_pred) -> ConfusionCounts:
    """
    Count agreements between true and predicted labels in {+1, -1}.

    Raises:
        InvalidArgumentError: If the vectors differ in length.
    """
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.shape != y_pred.shape:
        raise InvalidArgumentError(f"Label vectors differ in length: {y_true.shape[0]} vs {y_pred.shape[0]}")
    positive = y_true == 1
    predicted_positive = y_pred == 1
    return ConfusionCounts(
        tp=int(np.sum(positive & predicted_positive)),
        tn=int(np.sum(~positive & ~predicted_positive)),
        fp=int(np.sum(~positive & predicted_positive)),
        fn=int(np.sum(positive & ~predicted_positive)),
    )


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    if denominator == 0:
        return None
    return numerator / denominator


def compute_metrics(counts: ConfusionCounts) -> MetricSet:
    """
    Accuracy, sensitivity, precision, specificity and error rate.

    Args:
        counts (ConfusionCounts): The confusion counts.

    Returns:
        MetricSet: The metrics; sensitivity, precision and specificity are ``None``
        when undefined.

    Raises:
        InvalidArgumentError: If no samples were counted.
    """
    total = counts.total
    if total == 0:
        raise InvalidArgumentError("Cannot compute metrics over zero samples")
    errors = counts.fp + counts.fn
    return MetricSet(
        accuracy=(counts.tp + counts.tn) / total,
        sensitivity=_ratio(counts.tp, counts.tp + counts.fn),
        precision=_ratio(counts.tp, counts.tp + counts.fp),
        specificity=_ratio(counts.tn, counts.tn + counts.fp),
        error_rate=errors / total,
    )
