"""Regression and classification scores used in the benchmark tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class RegressionMetrics:
    score: float
    estimation_error: float


@dataclass(frozen=True)
class ClassificationMetrics:
    precision: float
    accuracy: float


def _pair(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise MetricError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise MetricError("empty input")
    return pred, truth


def evaluate_regression(pred, truth) -> RegressionMetrics:
    """Coefficient of determination and RMSE.

    With constant ``truth`` the score is 1 for an exact fit and undefined
    (raised as :class:`MetricError`) otherwise.
    """
    pred, truth = _pair(np.asarray(pred, dtype=float), np.asarray(truth, dtype=float))
    resid = truth - pred
    ss_res = float(resid @ resid)
    dev = truth - truth.mean()
    ss_tot = float(dev @ dev)
    if ss_tot == 0.0:
        if ss_res != 0.0:
            raise MetricError("score undefined: constant truth with non-zero residual (-inf)")
        score = 1.0
    else:
        score = 1.0 - ss_res / ss_tot
    return RegressionMetrics(score=score, estimation_error=float(np.sqrt(ss_res / truth.size)))


def evaluate_classification(pred, truth) -> ClassificationMetrics:
    """Macro precision over all classes seen in either vector, and accuracy."""
    pred, truth = _pair(pred, truth)
    classes = np.union1d(np.unique(pred), np.unique(truth))
    precisions = []
    for c in classes:
        predicted = pred == c
        n_pred = int(predicted.sum())
        precisions.append(float((predicted & (truth == c)).sum()) / n_pred if n_pred else 0.0)
    return ClassificationMetrics(
        precision=float(np.mean(precisions)),
        accuracy=float(np.mean(pred == truth)),
    )
