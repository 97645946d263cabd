"""Parameters, initializers, and the stateless functional ops.

Everything is float64: the graphs here are desk-scale and the
finite-difference gradient checks want the precision.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Parameter",
    "glorot_uniform",
    "softmax",
    "relu",
    "weighted_cross_entropy",
    "PROB_CLAMP",
    "clamp_warnings",
]

PROB_CLAMP = 1e-12

# Count of probability clamps in weighted_cross_entropy (diagnostic, not an error).
clamp_warnings = {"count": 0}


class Parameter:
    """A learnable tensor with its gradient and optimizer moment buffers."""

    def __init__(self, value: np.ndarray):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.zeros_like(self.value)
        self.m = np.zeros_like(self.value)
        self.v = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0


def glorot_uniform(rng, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Shift-invariant softmax; strictly positive, sums to 1 along ``axis``."""
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def relu(x):
    return np.maximum(x, 0.0)


def weighted_cross_entropy(probs: np.ndarray, labels, weights):
    """Class-weighted negative log likelihood, averaged over the batch.

    ``probs`` is (B, K) from softmax; ``weights`` is (K,). Probabilities at
    the target below PROB_CLAMP are clamped (counted in ``clamp_warnings``),
    never raised as errors.

    Returns (loss, dlogits) where dlogits is the gradient w.r.t. the logits
    that produced ``probs`` (softmax and loss fused).
    """
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    y = np.atleast_1d(np.asarray(labels, dtype=int))
    w = np.asarray(weights, dtype=float)
    b = p.shape[0]

    p_target = p[np.arange(b), y]
    clamped = p_target < PROB_CLAMP
    if clamped.any():
        clamp_warnings["count"] += int(clamped.sum())
        p_target = np.maximum(p_target, PROB_CLAMP)

    w_target = w[y]
    loss = float(np.mean(-w_target * np.log(p_target)))

    onehot = np.zeros_like(p)
    onehot[np.arange(b), y] = 1.0
    dlogits = w_target[:, None] * (p - onehot) / b
    return loss, dlogits
