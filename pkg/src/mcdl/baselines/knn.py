"""K-nearest-neighbor regression with Euclidean, Manhattan and Minkowski metrics."""

from __future__ import annotations

import numpy as np

from ..ingest import Dataset

METRICS = ("euclidean", "manhattan", "minkowski")


def manhattan(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(u, dtype=float) - v).sum(axis=-1)


def euclidean(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    d = np.asarray(u, dtype=float) - v
    return np.sqrt((d * d).sum(axis=-1))


def minkowski(u: np.ndarray, v: np.ndarray, p: float = 3.0) -> np.ndarray:
    """Minkowski distance of order ``p``; p=1 and p=2 use the closed forms."""
    if p < 1:
        raise ValueError(f"minkowski order must be >= 1, got {p}")
    if p == 1:
        return manhattan(u, v)
    if p == 2:
        return euclidean(u, v)
    d = np.abs(np.asarray(u, dtype=float) - v)
    if np.isinf(p):
        return d.max(axis=-1)
    return (d ** p).sum(axis=-1) ** (1.0 / p)


def distances(X: np.ndarray, q: np.ndarray, metric: str = "euclidean", p: float = 3.0) -> np.ndarray:
    if metric == "euclidean":
        return euclidean(X, q)
    if metric == "manhattan":
        return manhattan(X, q)
    if metric == "minkowski":
        return minkowski(X, q, p)
    raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")


def knn_regress(
    train: Dataset, query: np.ndarray, k: int = 10, metric: str = "euclidean", p: float = 3.0
) -> float:
    """Mean target of the ``k`` nearest training rows (ties by lower row index)."""
    n = len(train)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    query = np.asarray(query, dtype=float)
    if query.shape != (train.dim,):
        raise ValueError(f"query shape {query.shape} does not match dimension {train.dim}")
    d = distances(train.rows, query, metric, p)
    nearest = np.lexsort((np.arange(n), d))[:k]
    return float(train.targets[nearest].mean())


class KnnRegressor:
    def __init__(self, k: int = 10, metric: str = "euclidean", p: float = 3.0):
        self.k = k
        self.metric = metric
        self.p = p

    def fit(self, train: Dataset) -> "KnnRegressor":
        if not 1 <= self.k <= len(train):
            raise ValueError(f"k={self.k} out of range [1, {len(train)}]")
        self.train_ = train
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.array([knn_regress(self.train_, q, self.k, self.metric, self.p) for q in np.asarray(X, dtype=float)])
