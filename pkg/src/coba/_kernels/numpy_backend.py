"""Reference (pure numpy) implementations of the hot training kernels.

These define the numerical contract; the compiled extension in ``_core.pyx``
mirrors the exact same math. Shapes are batch-first: sequences are
(B, L, channels), weights are stored so the time loop reduces to matmuls.

LSTM gate layout along the last axis of the fused weight matrices is
[input, forget, output, cell]: the three sigmoid gates first (one contiguous
block for the vectorized exp), the tanh candidate last.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "conv1d_forward",
    "conv1d_backward",
    "lstm_forward",
    "lstm_backward",
]


def _sigmoid_block(s):
    # Stable: exp(-|s|) never overflows; both branches share one exp.
    e = np.exp(-np.abs(s))
    return np.where(s >= 0, 1.0, e) / (1.0 + e)


def _im2col(x, k):
    b, l, c_in = x.shape
    pad = (k - 1) // 2
    xp = np.zeros((b, l + k - 1, c_in))
    xp[:, pad:pad + l] = x
    cols = sliding_window_view(xp, k, axis=1)        # (B, L, Cin, K)
    return np.ascontiguousarray(cols.transpose(0, 1, 3, 2)).reshape(b * l, k * c_in)


def conv1d_forward(x, w, bias):
    """Same-length cross-correlation along time.

    x: (B, L, Cin); w: (K, Cin, Cout); bias: (Cout,) -> y: (B, L, Cout).
    """
    b, l, c_in = x.shape
    k, _, c_out = w.shape
    cols = _im2col(x, k)
    y = cols @ w.reshape(k * c_in, c_out) + bias
    return y.reshape(b, l, c_out)


def conv1d_backward(x, w, dy):
    """Gradients of conv1d_forward w.r.t. input, weights, bias."""
    b, l, c_in = x.shape
    k, _, c_out = w.shape
    pad = (k - 1) // 2
    dy2 = dy.reshape(b * l, c_out)

    cols = _im2col(x, k)
    dw = (cols.T @ dy2).reshape(k, c_in, c_out)
    db = dy2.sum(axis=0)

    g = (dy2 @ w.reshape(k * c_in, c_out).T).reshape(b, l, k, c_in)
    dxp = np.zeros((b, l + k - 1, c_in))
    for j in range(k):
        dxp[:, j:j + l] += g[:, :, j]
    return dxp[:, pad:pad + l], dw, db


def lstm_forward(x, wx, wh, bias):
    """Full-sequence LSTM from zero initial state.

    x: (B, L, C); wx: (C, 4H); wh: (H, 4H); bias: (4H,).
    Returns (h_all (B, L, H), cache); the cache feeds lstm_backward.
    """
    b, l, _ = x.shape
    h = wh.shape[0]
    xproj = x.reshape(b * l, -1) @ wx + bias
    xproj = xproj.reshape(b, l, 4 * h)

    h_all = np.empty((b, l, h))
    c_all = np.empty((b, l, h))
    tc_all = np.empty((b, l, h))
    gates = np.empty((b, l, 4 * h))

    h_prev = np.zeros((b, h))
    c_prev = np.zeros((b, h))
    for t in range(l):
        a = xproj[:, t] + h_prev @ wh
        sig = _sigmoid_block(a[:, :3 * h])
        gg = np.tanh(a[:, 3 * h:])
        gi, gf, go = sig[:, :h], sig[:, h:2 * h], sig[:, 2 * h:]
        c_t = gf * c_prev + gi * gg
        tc = np.tanh(c_t)
        h_t = go * tc
        gates[:, t, :3 * h] = sig
        gates[:, t, 3 * h:] = gg
        c_all[:, t] = c_t
        tc_all[:, t] = tc
        h_all[:, t] = h_t
        h_prev, c_prev = h_t, c_t
    return h_all, (gates, c_all, tc_all, h_all)


def lstm_backward(x, wx, wh, dh_all, cache):
    """Backward through time for lstm_forward.

    dh_all: (B, L, H) gradient w.r.t. every hidden state.
    Returns (dx, dwx, dwh, dbias).
    """
    gates, c_all, tc_all, h_all = cache
    b, l, _ = x.shape
    h = wh.shape[0]

    dgates = np.empty((b, l, 4 * h))
    dh_next = np.zeros((b, h))
    dc_next = np.zeros((b, h))
    wh_t = wh.T.copy()
    for t in range(l - 1, -1, -1):
        gi = gates[:, t, :h]
        gf = gates[:, t, h:2 * h]
        go = gates[:, t, 2 * h:3 * h]
        gg = gates[:, t, 3 * h:]
        tc = tc_all[:, t]
        c_prev = c_all[:, t - 1] if t > 0 else 0.0

        dh = dh_all[:, t] + dh_next
        dc = dh * go * (1.0 - tc * tc) + dc_next

        dg_t = dgates[:, t]
        dg_t[:, :h] = (dc * gg) * gi * (1.0 - gi)
        dg_t[:, h:2 * h] = (dc * c_prev) * gf * (1.0 - gf)
        dg_t[:, 2 * h:3 * h] = (dh * tc) * go * (1.0 - go)
        dg_t[:, 3 * h:] = (dc * gi) * (1.0 - gg * gg)

        dh_next = dg_t @ wh_t
        dc_next = dc * gf

    dg2 = dgates.reshape(b * l, 4 * h)
    dx = (dg2 @ wx.T).reshape(x.shape)
    dwx = x.reshape(b * l, -1).T @ dg2

    h_prev_all = np.zeros_like(h_all)
    h_prev_all[:, 1:] = h_all[:, :-1]
    dwh = h_prev_all.reshape(b * l, h).T @ dg2
    dbias = dg2.sum(axis=0)
    return dx, dwx, dwh, dbias
