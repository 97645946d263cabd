"""Per-sample reference classifiers: K-nearest neighbors and logistic
regression on the standardized feature vectors (not windows)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["KnnModel", "knn_predict", "LogRegModel", "logreg_fit", "logreg_predict", "bce_loss_and_grad"]


class BaselineError(ValueError):
    pass


@dataclass
class KnnModel:
    train_features: np.ndarray
    train_labels: np.ndarray
    k: int = 5

    def __post_init__(self):
        self.train_features = np.asarray(self.train_features, dtype=float)
        self.train_labels = np.asarray(self.train_labels).astype(int)
        n = len(self.train_labels)
        if n == 0:
            raise BaselineError("KNN needs at least one training point")
        if not (1 <= self.k <= n):
            raise BaselineError(f"k={self.k} out of range for {n} training points")


def knn_predict(model: KnnModel, x) -> np.ndarray:
    """Majority vote of the k nearest training points (Euclidean).

    Distance ties resolve to the lower training index (stable sort); vote
    ties resolve to label 1.
    """
    queries = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty(len(queries), dtype=int)
    for i, q in enumerate(queries):
        d2 = np.sum((model.train_features - q) ** 2, axis=1)
        nearest = np.argsort(d2, kind="stable")[: model.k]
        votes1 = int(model.train_labels[nearest].sum())
        out[i] = 1 if 2 * votes1 >= model.k else 0
    return out if np.asarray(x).ndim == 2 else out[:1]


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float


def bce_loss_and_grad(weights, bias, x, y):
    """Mean binary cross-entropy and its gradient w.r.t. (weights, bias)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = x @ weights + bias
    p = _sigmoid(z)
    eps = 1e-12
    loss = float(np.mean(-(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps))))
    err = (p - y) / len(y)
    return loss, x.T @ err, float(err.sum())


def logreg_fit(x, y, lr: float = 0.5, epochs: int = 300) -> LogRegModel:
    """Full-batch gradient descent on binary cross-entropy from zero init."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y).astype(int)
    w = np.zeros(x.shape[1])
    b = 0.0
    for _ in range(epochs):
        loss, gw, gb = bce_loss_and_grad(w, b, x, y)
        if not np.isfinite(loss):
            raise BaselineError("logistic regression diverged (non-finite loss)")
        w -= lr * gw
        b -= lr * gb
    return LogRegModel(weights=w, bias=b)


def logreg_predict(model: LogRegModel, x) -> np.ndarray:
    """1 iff sigmoid(w.x + b) > 0.5; the exact-0.5 tie goes to class 0."""
    queries = np.atleast_2d(np.asarray(x, dtype=float))
    z = queries @ model.weights + model.bias
    out = (z > 0).astype(int)
    return out if np.asarray(x).ndim == 2 else out[:1]
