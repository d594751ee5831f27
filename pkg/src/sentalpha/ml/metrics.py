"""Binary classification metrics with +1 as the positive class.

Empty denominators yield 0.0 rather than raising, so degenerate windows
(no positive predictions, say) produce comparable scores.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch


@dataclass(frozen=True)
class ClassificationMetrics:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float


def _check_labels(arr, name):
    arr = np.asarray(arr)
    bad = ~np.isin(arr, (-1, 1))
    if bad.any():
        raise ValueError(f"{name} contains labels outside -1/+1")
    return arr.astype(np.int64)


def classification_metrics(y_true, y_pred) -> ClassificationMetrics:
    """Confusion counts and derived rates for direction labels.

    Raises:
        LengthMismatch: arrays differ in length or are empty.
        ValueError: a label is outside {-1, +1}.
    """
    y_true = _check_labels(y_true, "y_true")
    y_pred = _check_labels(y_pred, "y_pred")
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise LengthMismatch(
            f"y_true {y_true.shape} vs y_pred {y_pred.shape}"
        )
    if y_true.size == 0:
        raise LengthMismatch("empty label arrays")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == -1) & (y_pred == 1)))
    tn = int(np.sum((y_true == -1) & (y_pred == -1)))
    fn = int(np.sum((y_true == 1) & (y_pred == -1)))
    n = tp + fp + tn + fn
    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
    return ClassificationMetrics(tp, fp, tn, fn, accuracy, precision, recall, f1)
