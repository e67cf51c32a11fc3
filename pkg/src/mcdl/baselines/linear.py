"""Ordinary least squares and ridge regression via the normal equations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..ingest import Dataset


class SingularSystemError(LinAlgError):
    pass


@dataclass(frozen=True)
class LinearModel:
    coef: np.ndarray
    intercept: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept


def fit_linear(X: np.ndarray, y: np.ndarray, lam: float = 0.0) -> LinearModel:
    """Least squares on arrays, ridge-penalized (intercept excluded) when ``lam > 0``."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    # centering removes the intercept from the penalized system
    if lam == 0:
        rank = np.linalg.matrix_rank(Xc)
        if rank < d:
            raise SingularSystemError(
                f"design matrix is rank deficient (rank {rank} < {d} features, {n} rows)"
            )
    A = Xc.T @ Xc + lam * np.eye(d)
    try:
        coef = cho_solve(cho_factor(A), Xc.T @ (y - y_mean))
    except LinAlgError as exc:
        raise SingularSystemError(f"normal equations not positive definite: {exc}") from None
    return LinearModel(coef, float(y_mean - x_mean @ coef))


def ols_regress(train: Dataset) -> LinearModel:
    return fit_linear(train.rows, train.targets, 0.0)


def ridge_regress(train: Dataset, lam: float = 1.0) -> LinearModel:
    """Ridge fit with an unpenalized intercept."""
    return fit_linear(train.rows, train.targets, lam)
