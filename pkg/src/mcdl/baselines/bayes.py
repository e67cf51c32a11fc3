"""Gaussian and Bernoulli naive Bayes, computed in log space."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from ..ingest import Dataset

VAR_FLOOR = 1e-9


class _NaiveBayes:
    def _setup(self, X, y):
        X = np.asarray(X, dtype=float)
        self.classes_, codes = np.unique(np.asarray(y), return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("naive Bayes needs at least two classes")
        self.class_count_ = np.bincount(codes).astype(float)
        self.log_prior_ = np.log(self.class_count_ / len(codes))
        return X, codes

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_log_proba(self, X: np.ndarray) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return jll - logsumexp(jll, axis=1, keepdims=True)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.exp(self.predict_log_proba(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax returns the first maximum: smallest label on ties
        return self.classes_[np.argmax(self.joint_log_likelihood(X), axis=1)]


class GaussianNB(_NaiveBayes):
    def fit(self, X, y) -> "GaussianNB":
        X, codes = self._setup(X, y)
        C = len(self.classes_)
        self.theta_ = np.stack([X[codes == c].mean(axis=0) for c in range(C)])
        self.var_ = np.maximum(np.stack([X[codes == c].var(axis=0) for c in range(C)]), VAR_FLOOR)
        return self

    def joint_log_likelihood(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        diff = X[:, None, :] - self.theta_[None]
        ll = -0.5 * (np.log(2 * np.pi * self.var_)[None] + diff**2 / self.var_[None]).sum(axis=2)
        return ll + self.log_prior_


class BernoulliNB(_NaiveBayes):
    """Features are binarized as ``x > threshold``; bit probabilities use
    Laplace smoothing ``(count + 1) / (n_class + 2)``."""

    def __init__(self, threshold: float = 0.0):
        self.threshold = threshold

    def fit(self, X, y) -> "BernoulliNB":
        X, codes = self._setup(X, y)
        bits = (X > self.threshold).astype(float)
        ones = np.stack([bits[codes == c].sum(axis=0) for c in range(len(self.classes_))])
        self.feature_prob_ = (ones + 1.0) / (self.class_count_[:, None] + 2.0)
        return self

    def joint_log_likelihood(self, X):
        bits = (np.atleast_2d(np.asarray(X, dtype=float)) > self.threshold).astype(float)
        logp = np.log(self.feature_prob_)
        log1mp = np.log1p(-self.feature_prob_)
        return bits @ logp.T + (1.0 - bits) @ log1mp.T + self.log_prior_


def _labels(train: Dataset):
    if train.labels is None:
        raise ValueError("naive Bayes needs labels")
    return train.labels


def gaussian_nb(train: Dataset) -> GaussianNB:
    return GaussianNB().fit(train.rows, _labels(train))


def bernoulli_nb(train: Dataset, binarize_threshold: float = 0.0) -> BernoulliNB:
    return BernoulliNB(binarize_threshold).fit(train.rows, _labels(train))
