"""Seeded synthetic datasets for tests, benchmarks and stream replay."""

from __future__ import annotations

import numpy as np

from .ingest import Dataset


def _names(d: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(d))


def linear_noise(n: int = 400, d: int = 3, noise: float = 0.1, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    w = rng.uniform(-2, 2, size=d)
    y = X @ w + 0.5 + noise * rng.normal(size=n)
    labels = np.where(y > np.median(y), "high", "low")
    return Dataset(X, y, _names(d), labels, "y")


def piecewise(n: int = 400, d: int = 2, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Step/kink response; useful where trees beat linear models."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-3, 3, size=(n, d))
    y = np.where(X[:, 0] > 0, 5.0 + X[:, 1], -2.0 - 0.5 * X[:, 1] ** 2) + noise * rng.normal(size=n)
    labels = np.where(X[:, 0] > 0, "right", "left")
    return Dataset(X, y, _names(d), labels, "y")


def blob_centers(n_blobs: int = 4, d: int = 2, separation: float = 10.0) -> np.ndarray:
    """Centers on the vertices of a square-ish grid, ``separation`` apart."""
    side = int(np.ceil(np.sqrt(n_blobs)))
    grid = [(i // side, i % side) for i in range(n_blobs)]
    centers = np.zeros((n_blobs, d))
    for b, (r, c) in enumerate(grid):
        centers[b, 0] = separation * r
        if d > 1:
            centers[b, 1] = separation * c
    return centers


def blobs(
    n_per_blob: int = 50,
    n_blobs: int = 4,
    d: int = 2,
    spread: float = 0.3,
    separation: float = 10.0,
    target_noise: float = 0.05,
    seed: int = 0,
    shuffle: bool = True,
) -> tuple[Dataset, np.ndarray]:
    """Gaussian blobs whose target is ``blob index + 1`` plus noise.

    Returns the dataset and each row's blob index. Labels are ``"b<index>"``.
    """
    rng = np.random.default_rng(seed)
    centers = blob_centers(n_blobs, d, separation)
    blob = np.repeat(np.arange(n_blobs), n_per_blob)
    if shuffle:
        blob = rng.permutation(blob)
    X = centers[blob] + spread * rng.normal(size=(len(blob), d))
    y = blob + 1.0 + target_noise * rng.normal(size=len(blob))
    labels = np.array([f"b{b}" for b in blob])
    return Dataset(X, y, _names(d), labels, "y"), blob


class GaussianMixture:
    """Drift-free isotropic Gaussian mixture for replaying a stream."""

    def __init__(self, means: np.ndarray, scales: np.ndarray, weights: np.ndarray):
        self.means = np.asarray(means, dtype=float)
        self.scales = np.asarray(scales, dtype=float)
        w = np.asarray(weights, dtype=float)
        self.weights = w / w.sum()

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(len(self.weights), size=n, p=self.weights)
        noise = rng.normal(size=(n, self.means.shape[1]))
        return self.means[comp] + self.scales[comp] * noise
