"""Shallow feed-forward regressor with sigmoid hidden layers and a linear head."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .ingest import NormParams


class NetworkError(ValueError):
    pass


class DivergenceError(RuntimeError):
    pass


class ConstantOutputError(ValueError):
    pass


@dataclass(frozen=True)
class Mlp:
    """Layers ``(W_i, b_i)`` with ``W_i`` shaped (out, in).

    Hidden layers compute ``sigmoid(W_i @ a + b_i)``; the last layer is affine.
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        ws = tuple(np.array(w, dtype=float) for w in self.weights)
        bs = tuple(np.array(b, dtype=float).reshape(-1) for b in self.biases)
        if not ws or len(ws) != len(bs):
            raise NetworkError("need one bias vector per weight matrix")
        for i, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise NetworkError(f"layer {i}: W {w.shape} and b {b.shape} disagree")
            if i and w.shape[1] != ws[i - 1].shape[0]:
                raise NetworkError(f"layer {i} input {w.shape[1]} != previous output {ws[i-1].shape[0]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NetworkError(f"layer {i} has non-finite parameters")
            w.setflags(write=False)
            b.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes,
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Mlp":
        sizes = d["sizes"]
        ws = [
            np.asarray(flat, dtype=float).reshape(sizes[i + 1], sizes[i])
            for i, flat in enumerate(d["weights"])
        ]
        return cls(tuple(ws), tuple(np.asarray(b, dtype=float) for b in d["biases"]))


def init_mlp(sizes: Sequence[int], seed: int = 0) -> Mlp:
    """Uniform ``±1/sqrt(fan_in)`` initialization for weights and biases."""
    if len(sizes) < 2 or min(sizes) < 1:
        raise NetworkError(f"bad layer sizes {list(sizes)}")
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        ws.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        bs.append(rng.uniform(-bound, bound, size=fan_out))
    return Mlp(tuple(ws), tuple(bs))


def forward(model: Mlp, x: np.ndarray) -> np.ndarray:
    """Map one input vector through the network."""
    a = np.asarray(x, dtype=float)
    if a.shape != (model.weights[0].shape[1],):
        raise NetworkError(f"input shape {a.shape}, expected ({model.weights[0].shape[1]},)")
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = w @ a + b
        a = z if i == last else expit(z)
    return a


def _forward_cache(model: Mlp, X: np.ndarray) -> list[np.ndarray]:
    acts = [X]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w.T + b
        acts.append(z if i == last else expit(z))
    return acts


def predict(model: Mlp, X: np.ndarray) -> np.ndarray:
    """Batched forward pass, rows of ``X`` are inputs; returns (n, out)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.weights[0].shape[1]:
        raise NetworkError(f"inputs have {X.shape[1]} columns, expected {model.weights[0].shape[1]}")
    return _forward_cache(model, X)[-1]


def _as_targets(model: Mlp, Y: np.ndarray, n: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape != (n, model.weights[-1].shape[0]):
        raise NetworkError(f"targets shape {Y.shape} does not match ({n}, {model.weights[-1].shape[0]})")
    return Y


def mse(model: Mlp, X: np.ndarray, Y: np.ndarray) -> float:
    P = predict(model, X)
    Y = _as_targets(model, Y, len(P))
    return float(np.mean((P - Y) ** 2))


def gradient(model: Mlp, X: np.ndarray, Y: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Backpropagated gradient of the batch mean squared error.

    Returns ``(dW, db)`` lists aligned with ``model.weights`` / ``model.biases``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(X) == 0:
        raise NetworkError("empty batch")
    if X.shape[1] != model.weights[0].shape[1]:
        raise NetworkError(f"inputs have {X.shape[1]} columns, expected {model.weights[0].shape[1]}")
    Y = _as_targets(model, Y, len(X))
    acts = _forward_cache(model, X)
    delta = 2.0 * (acts[-1] - Y) / Y.size
    dW: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    db: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    for i in range(len(model.weights) - 1, -1, -1):
        dW[i] = delta.T @ acts[i]
        db[i] = delta.sum(axis=0)
        if i:
            a = acts[i]
            delta = (delta @ model.weights[i]) * a * (1.0 - a)
    return dW, db


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0


@dataclass
class TrainReport:
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def epochs_run(self) -> int:
        return len(self.epoch_losses)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1]


def train(
    model: Mlp, X: np.ndarray, Y: np.ndarray, hyper: TrainConfig = TrainConfig()
) -> tuple[Mlp, TrainReport]:
    """Seeded mini-batch gradient descent on mean squared error.

    The loss recorded per epoch is the full-data MSE after that epoch's
    updates. Raises :class:`DivergenceError` if it becomes non-finite or
    exceeds ``1e6`` times the loss before training.
    """
    if hyper.lr < 0 or hyper.epochs < 1 or hyper.batch_size < 1:
        raise NetworkError(f"invalid training config {hyper}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(X) == 0:
        raise NetworkError("cannot train on empty data")
    Y = _as_targets(model, Y, len(X))
    rng = np.random.default_rng(hyper.seed)
    ws = [w.copy() for w in model.weights]
    bs = [b.copy() for b in model.biases]
    initial = mse(model, X, Y)
    limit = 1e6 * max(initial, np.finfo(float).tiny)
    report = TrainReport()
    current = model
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(X))
        for start in range(0, len(X), hyper.batch_size):
            idx = order[start:start + hyper.batch_size]
            dW, db = gradient(current, X[idx], Y[idx])
            for i in range(len(ws)):
                ws[i] -= hyper.lr * dW[i]
                bs[i] -= hyper.lr * db[i]
            if not all(np.all(np.isfinite(w)) for w in ws):
                raise DivergenceError(f"parameters became non-finite in epoch {epoch}")
            current = Mlp(tuple(ws), tuple(bs))
        loss = mse(current, X, Y)
        report.epoch_losses.append(loss)
        if not np.isfinite(loss) or loss > limit:
            raise DivergenceError(f"epoch {epoch} loss {loss:.3g} diverged from initial {initial:.3g}")
    return current, report


def decision_value(x: float, params: NormParams, k: int = 0) -> float:
    """Normalized decision value ``(x - mean_k) / delta_k``."""
    delta = float(params.delta[k])
    if delta == 0.0:
        raise ConstantOutputError(f"delta for output {k} is zero; decision value undefined")
    return (float(x) - float(params.mean[k])) / delta
