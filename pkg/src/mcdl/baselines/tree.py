"""CART trees: variance-reduction regression and Gini classification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ingest import Dataset


@dataclass
class _Node:
    value: object
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _candidate_positions(xs: np.ndarray, min_leaf: int) -> np.ndarray:
    """Split positions i (left = first i sorted rows) between distinct values."""
    n = len(xs)
    pos = np.arange(min_leaf, n - min_leaf + 1)
    pos = pos[(pos > 0) & (pos < n)]
    return pos[xs[pos - 1] < xs[pos]]


def _best_regression_split(X, y, min_leaf):
    n = len(y)
    parent = float(((y - y.mean()) ** 2).sum())
    best = (0.0, -1, 0.0)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        pos = _candidate_positions(xs, min_leaf)
        if not len(pos):
            continue
        cs, cq = np.cumsum(ys), np.cumsum(ys * ys)
        ls, lq = cs[pos - 1], cq[pos - 1]
        rs, rq = cs[-1] - ls, cq[-1] - lq
        sse = (lq - ls * ls / pos) + (rq - rs * rs / (n - pos))
        gain = parent - sse
        i = int(np.argmax(gain))
        if gain[i] > best[0] + 1e-12 * max(parent, 1.0):
            p = pos[i]
            best = (float(gain[i]), f, 0.5 * (xs[p - 1] + xs[p]))
    return best


def _best_gini_split(X, codes, n_classes, min_leaf):
    n = len(codes)
    counts = np.bincount(codes, minlength=n_classes)
    parent = 1.0 - float(((counts / n) ** 2).sum())
    best = (0.0, -1, 0.0)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        pos = _candidate_positions(xs, min_leaf)
        if not len(pos):
            continue
        onehot = np.eye(n_classes)[codes[order]]
        left = np.cumsum(onehot, axis=0)[pos - 1]
        right = counts - left
        nl = pos[:, None].astype(float)
        nr = (n - pos)[:, None].astype(float)
        gl = 1.0 - ((left / nl) ** 2).sum(axis=1)
        gr = 1.0 - ((right / nr) ** 2).sum(axis=1)
        gain = parent - (pos * gl + (n - pos) * gr) / n
        i = int(np.argmax(gain))
        if gain[i] > best[0] + 1e-12:
            p = pos[i]
            best = (float(gain[i]), f, 0.5 * (xs[p - 1] + xs[p]))
    return best


class DecisionTree:
    """Greedy axis-aligned binary tree.

    Thresholds are midpoints between consecutive distinct sorted values;
    rows with ``x[feature] <= threshold`` go left. Leaves predict the mean
    (regression) or the majority class, ties to the smallest label.
    """

    def __init__(self, task: str = "regression", max_depth: int = 5, min_leaf: int = 1):
        if task not in ("regression", "classification"):
            raise ValueError(f"unknown task {task!r}")
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        self.task = task
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def _leaf_value(self, y):
        if self.task == "regression":
            return float(y.mean())
        return int(np.argmax(np.bincount(y, minlength=len(self.classes_))))

    def _grow(self, X, y, depth):
        node = _Node(self._leaf_value(y))
        if depth >= self.max_depth or len(y) < 2 * self.min_leaf or np.all(y == y[0]):
            return node
        if self.task == "regression":
            gain, f, thr = _best_regression_split(X, y, self.min_leaf)
        else:
            gain, f, thr = _best_gini_split(X, y, len(self.classes_), self.min_leaf)
        if f < 0:
            return node
        mask = X[:, f] <= thr
        node.feature, node.threshold = f, thr
        node.left = self._grow(X[mask], y[mask], depth + 1)
        node.right = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        X = np.asarray(X, dtype=float)
        if self.task == "classification":
            self.classes_, y = np.unique(np.asarray(y), return_inverse=True)
        else:
            y = np.asarray(y, dtype=float)
        self.root_ = self._grow(X, y, 0)
        return self

    def _predict_one(self, x):
        node = self.root_
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = [self._predict_one(x) for x in np.asarray(X, dtype=float)]
        if self.task == "classification":
            return self.classes_[np.asarray(out, dtype=int)]
        return np.asarray(out, dtype=float)

    @property
    def depth(self) -> int:
        def walk(nd):
            return 0 if nd.is_leaf else 1 + max(walk(nd.left), walk(nd.right))

        return walk(self.root_)

    def splits(self) -> list[tuple[int, float]]:
        """(feature, threshold) for every internal node, pre-order."""
        out = []

        def walk(nd):
            if not nd.is_leaf:
                out.append((nd.feature, nd.threshold))
                walk(nd.left)
                walk(nd.right)

        walk(self.root_)
        return out


def tree_regress(train: Dataset, max_depth: int = 5, min_leaf: int = 1) -> DecisionTree:
    return DecisionTree("regression", max_depth, min_leaf).fit(train.rows, train.targets)


def tree_classify(train: Dataset, max_depth: int = 5, min_leaf: int = 1) -> DecisionTree:
    if train.labels is None:
        raise ValueError("classification tree needs labels")
    return DecisionTree("classification", max_depth, min_leaf).fit(train.rows, train.labels)
