"""Binary classification metrics with phishing as the positive class."""

from dataclasses import dataclass

import numpy as np

METRIC_NAMES = ("accuracy", "f1", "precision", "recall")


@dataclass(frozen=True)
class Metrics:
    """Accuracy, F1, precision and recall, each in [0, 1]."""

    accuracy: float
    f1: float
    precision: float
    recall: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def confusion(y_true, y_pred) -> tuple[int, int, int, int]:
    """Return (tp, fp, fn, tn) counts for 0/1 labels."""
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise ValueError("y_true and y_pred must have the same shape")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    tn = int(np.sum((t == 0) & (p == 0)))
    return tp, fp, fn, tn


def metrics_from_confusion(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    """Compute the four metrics from confusion counts.

    Zero denominators yield 0.0, including F1 when precision and recall
    are both zero.
    """
    n = tp + fp + fn + tn
    if n == 0:
        raise ValueError("confusion counts sum to zero")
    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(accuracy=accuracy, f1=f1, precision=precision, recall=recall)


def binary_metrics(y_true, y_pred) -> Metrics:
    """Metrics for a pair of 0/1 label arrays."""
    return metrics_from_confusion(*confusion(y_true, y_pred))


@dataclass(frozen=True)
class MetricsReport:
    """Per-fold metrics plus mean and population standard deviation."""

    folds: tuple[Metrics, ...]

    def __post_init__(self):
        if not self.folds:
            raise ValueError("a report needs at least one fold")

    def _column(self, name: str) -> np.ndarray:
        return np.array([getattr(m, name) for m in self.folds], dtype=np.float64)

    @property
    def mean(self) -> Metrics:
        return Metrics(**{n: float(self._column(n).mean()) for n in METRIC_NAMES})

    @property
    def std(self) -> Metrics:
        return Metrics(**{n: float(self._column(n).std()) for n in METRIC_NAMES})
