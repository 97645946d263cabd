"""Differentiable layers with hand-derived backward passes.

Each layer caches what its backward needs during forward, so the usage
contract is single-threaded forward-then-backward (the training loop's
natural order). All sequence shapes are batch-first (B, L, C).
"""

from __future__ import annotations

import numpy as np

from .. import _kernels as K
from .core import Parameter, glorot_uniform, softmax

__all__ = [
    "Linear",
    "Conv1d",
    "LayerNorm",
    "ReLU",
    "Dropout",
    "LSTM",
    "BiLSTM",
    "AdditiveAttention",
]


class Linear:
    def __init__(self, n_in: int, n_out: int, rng):
        self.w = Parameter(glorot_uniform(rng, (n_in, n_out), n_in, n_out))
        self.b = Parameter(np.zeros(n_out))
        self._x = None

    def forward(self, x):
        self._x = x
        return x @ self.w.value + self.b.value

    def backward(self, dy):
        x = self._x
        self.w.grad += x.reshape(-1, x.shape[-1]).T @ dy.reshape(-1, dy.shape[-1])
        self.b.grad += dy.reshape(-1, dy.shape[-1]).sum(axis=0)
        return dy @ self.w.value.T

    def parameters(self):
        return [("w", self.w), ("b", self.b)]


class Conv1d:
    """Same-length 1D cross-correlation over the time axis.

    The weight is stored (C_out, C_in, K); kernels must have odd K so the
    implicit zero padding of (K-1)/2 preserves sequence length.
    """

    def __init__(self, c_in: int, c_out: int, kernel_size: int, rng):
        if kernel_size % 2 != 1:
            raise ValueError("kernel size must be odd for same-length output")
        self.kernel_size = kernel_size
        fan_in = c_in * kernel_size
        fan_out = c_out * kernel_size
        self.w = Parameter(glorot_uniform(rng, (c_out, c_in, kernel_size), fan_in, fan_out))
        self.b = Parameter(np.zeros(c_out))
        self._x = None

    def _kernel_layout(self):
        # Backends want (K, C_in, C_out).
        return np.ascontiguousarray(self.w.value.transpose(2, 1, 0))

    def forward(self, x):
        if x.shape[-1] != self.w.shape[1]:
            raise ValueError(
                f"conv1d: input has {x.shape[-1]} channels, kernels expect {self.w.shape[1]}"
            )
        x = np.ascontiguousarray(x)
        self._x = x
        return K.conv1d_forward(x, self._kernel_layout(), self.b.value)

    def backward(self, dy):
        dx, dw, db = K.conv1d_backward(self._x, self._kernel_layout(), np.ascontiguousarray(dy))
        self.w.grad += dw.transpose(2, 1, 0)
        self.b.grad += db
        return dx

    def parameters(self):
        return [("w", self.w), ("b", self.b)]


class LayerNorm:
    """Normalize across channels at every time step, then affine."""

    def __init__(self, c: int, eps: float = 1e-5):
        self.gain = Parameter(np.ones(c))
        self.bias = Parameter(np.zeros(c))
        self.eps = eps
        self._cache = None

    def forward(self, x):
        mu = x.mean(axis=-1, keepdims=True)
        var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu) * inv_std
        self._cache = (xhat, inv_std)
        return self.gain.value * xhat + self.bias.value

    def backward(self, dy):
        xhat, inv_std = self._cache
        c = xhat.shape[-1]
        dxhat = dy * self.gain.value
        self.gain.grad += (dy * xhat).reshape(-1, c).sum(axis=0)
        self.bias.grad += dy.reshape(-1, c).sum(axis=0)
        mean_d = dxhat.mean(axis=-1, keepdims=True)
        mean_dx = (dxhat * xhat).mean(axis=-1, keepdims=True)
        return inv_std * (dxhat - mean_d - xhat * mean_dx)

    def parameters(self):
        return [("gain", self.gain), ("bias", self.bias)]


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)

    def parameters(self):
        return []


class Dropout:
    """Inverted dropout; identity in eval mode. The mask comes from the rng
    handed to forward, so a seeded generator makes training reproducible."""

    def __init__(self, rate: float):
        if not (0.0 <= rate < 1.0):
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self._mask = None

    def forward(self, x, training: bool = False, rng=None):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("dropout in training mode needs an rng")
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) >= self.rate) / keep
        return x * self._mask

    def backward(self, dy):
        if self._mask is None:
            return dy
        return dy * self._mask

    def parameters(self):
        return []


class LSTM:
    """Single-direction LSTM over the full sequence, zero initial state.

    Fused gate weights: wx (C, 4H), wh (H, 4H), bias (4H,) with gate order
    [input, forget, cell, output]; the forget slice starts at one.
    """

    def __init__(self, c_in: int, hidden: int, rng):
        self.hidden = hidden
        self.wx = Parameter(glorot_uniform(rng, (c_in, 4 * hidden), c_in, 4 * hidden))
        self.wh = Parameter(glorot_uniform(rng, (hidden, 4 * hidden), hidden, 4 * hidden))
        bias = np.zeros(4 * hidden)
        bias[hidden:2 * hidden] = 1.0
        self.b = Parameter(bias)
        self._cache = None
        self._x = None

    def forward(self, x):
        x = np.ascontiguousarray(x)
        self._x = x
        h_all, cache = K.lstm_forward(x, self.wx.value, self.wh.value, self.b.value)
        self._cache = cache
        return h_all

    def backward(self, dh_all):
        dx, dwx, dwh, db = K.lstm_backward(
            self._x, self.wx.value, self.wh.value, np.ascontiguousarray(dh_all), self._cache
        )
        self.wx.grad += dwx
        self.wh.grad += dwh
        self.b.grad += db
        return dx

    def parameters(self):
        return [("wx", self.wx), ("wh", self.wh), ("b", self.b)]


class BiLSTM:
    """Forward and time-reversed LSTM passes, concatenated per step."""

    def __init__(self, c_in: int, hidden: int, rng):
        self.hidden = hidden
        self.fwd = LSTM(c_in, hidden, rng)
        self.bwd = LSTM(c_in, hidden, rng)

    def forward(self, x):
        h_f = self.fwd.forward(x)
        h_b = self.bwd.forward(np.ascontiguousarray(x[:, ::-1]))[:, ::-1]
        return np.concatenate([h_f, h_b], axis=-1)

    def backward(self, dh):
        h = self.hidden
        dx_f = self.fwd.backward(dh[:, :, :h])
        dx_b = self.bwd.backward(np.ascontiguousarray(dh[:, ::-1, h:]))[:, ::-1]
        return dx_f + dx_b

    def parameters(self):
        return [("fwd." + n, p) for n, p in self.fwd.parameters()] + [
            ("bwd." + n, p) for n, p in self.bwd.parameters()
        ]


class AdditiveAttention:
    """Scalar score per time step, softmax over time, convex combination.

    scores e_t = h_t . w + b; weights alpha = softmax(e); context = sum of
    alpha_t * h_t. Returns (context (B, D), alphas (B, L)).
    """

    def __init__(self, dim: int, rng):
        self.w = Parameter(glorot_uniform(rng, (dim,), dim, 1))
        self.b = Parameter(np.zeros(1))
        self._cache = None

    def forward(self, h):
        scores = h @ self.w.value + self.b.value[0]          # (B, L)
        alphas = softmax(scores, axis=-1)
        context = np.einsum("bl,bld->bd", alphas, h)
        self._cache = (h, alphas)
        return context, alphas

    def backward(self, dcontext):
        h, alphas = self._cache
        dalpha = np.einsum("bd,bld->bl", dcontext, h)
        # softmax jacobian: de = alpha * (dalpha - sum_t alpha_t dalpha_t)
        de = alphas * (dalpha - (alphas * dalpha).sum(axis=-1, keepdims=True))
        dh = alphas[:, :, None] * dcontext[:, None, :] + de[:, :, None] * self.w.value
        self.w.grad += np.einsum("bl,bld->d", de, h)
        self.b.grad += de.sum()
        return dh

    def parameters(self):
        return [("w", self.w), ("b", self.b)]
