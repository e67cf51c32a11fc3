"""Linear SVM trained by primal hinge-loss subgradient descent."""

from __future__ import annotations

import numpy as np

from ..ingest import Dataset


def hinge_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, C: float) -> float:
    """``0.5 * |w|^2 + C * mean(max(0, 1 - y (w.x + b)))`` for y in {-1, +1}."""
    margins = 1.0 - y * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.maximum(margins, 0.0).mean())


def _fit_binary(X, y, lr, epochs, C, batch_size, rng):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    history = []
    for epoch in range(epochs):
        step = lr / np.sqrt(1.0 + epoch)
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            Xb, yb = X[idx], y[idx]
            active = yb * (Xb @ w + b) < 1.0
            gw = w - C * (yb[active, None] * Xb[active]).sum(axis=0) / len(idx)
            gb = -C * yb[active].sum() / len(idx)
            w = w - step * gw
            b = b - step * gb
        history.append(hinge_objective(w, b, X, y, C))
    return w, b, history


class LinearSVM:
    """One-vs-rest linear SVM.

    With two classes a single machine separates ``classes_[1]`` (positive)
    from ``classes_[0]``. Weights start at zero and minibatch order comes
    from ``seed``, so a run is fully deterministic.
    """

    def __init__(self, lr: float = 0.1, epochs: int = 200, C: float = 1.0, batch_size: int = 32, seed: int = 0):
        self.lr = lr
        self.epochs = epochs
        self.C = C
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y) -> "LinearSVM":
        X = np.asarray(X, dtype=float)
        self.classes_, codes = np.unique(np.asarray(y), return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("SVM needs at least two classes")
        targets = [1] if len(self.classes_) == 2 else range(len(self.classes_))
        self.coef_, self.intercept_, self.objective_history_ = [], [], []
        for c in targets:
            yy = np.where(codes == c, 1.0, -1.0)
            w, b, hist = _fit_binary(
                X, yy, self.lr, self.epochs, self.C, self.batch_size, np.random.default_rng(self.seed)
            )
            self.coef_.append(w)
            self.intercept_.append(b)
            self.objective_history_.append(hist)
        self.coef_ = np.array(self.coef_)
        self.intercept_ = np.array(self.intercept_)
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        f = np.atleast_2d(np.asarray(X, dtype=float)) @ self.coef_.T + self.intercept_
        return f[:, 0] if len(self.classes_) == 2 else f

    def predict(self, X: np.ndarray) -> np.ndarray:
        f = self.decision_function(X)
        if len(self.classes_) == 2:
            return self.classes_[(f > 0).astype(int)]
        return self.classes_[np.argmax(f, axis=1)]


def linear_svm(train: Dataset, lr: float = 0.1, epochs: int = 200, C: float = 1.0, seed: int = 0) -> LinearSVM:
    if train.labels is None:
        raise ValueError("SVM needs labels")
    return LinearSVM(lr=lr, epochs=epochs, C=C, seed=seed).fit(train.rows, train.labels)
