"""Binary confusion counts and the derived scores.

Label 1 is the positive class throughout. Ratios with a zero denominator
are defined as 0.0 rather than raised, so degenerate predictions still
produce a full metric row.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidLabel, LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float


def confusion(truth, predicted) -> ConfusionMatrix:
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape or truth.ndim != 1:
        raise LengthMismatch(
            f"truth has shape {truth.shape}, predictions {predicted.shape}"
        )
    if truth.size == 0:
        raise EmptyInput("cannot score zero predictions")
    for name, arr in (("truth", truth), ("predicted", predicted)):
        if not np.all(np.isin(arr, (0, 1))):
            raise InvalidLabel(f"{name} labels must be 0 or 1")
    return ConfusionMatrix(
        tp=int(np.sum((truth == 1) & (predicted == 1))),
        fp=int(np.sum((truth == 0) & (predicted == 1))),
        fn=int(np.sum((truth == 1) & (predicted == 0))),
        tn=int(np.sum((truth == 0) & (predicted == 0))),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def metric_set(cm: ConfusionMatrix) -> MetricSet:
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1 = _ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn)
    return MetricSet(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        precision=precision,
        recall=recall,
        f1=f1,
    )


def score(truth, predicted) -> MetricSet:
    return metric_set(confusion(truth, predicted))
