"""AdamW with decoupled weight decay, plus global-norm gradient clipping."""

from __future__ import annotations

import numpy as np

__all__ = ["AdamW", "clip_grad_norm"]


class AdamW:
    """Bias-corrected adaptive moments; weight decay acts directly on the
    parameter, separate from the adaptive step."""

    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        if lr < 0 or not (0 <= beta1 < 1) or not (0 <= beta2 < 1) or eps <= 0 or weight_decay < 0:
            raise ValueError("invalid AdamW hyperparameters")
        self.params = [p for _, p in params] if params and isinstance(params[0], tuple) else list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0

    def step(self):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p in self.params:
            g = p.grad
            p.m[...] = self.beta1 * p.m + (1.0 - self.beta1) * g
            p.v[...] = self.beta2 * p.v + (1.0 - self.beta2) * g * g
            if self.weight_decay != 0.0:
                p.value[...] = p.value * (1.0 - self.lr * self.weight_decay)
            m_hat = p.m / bc1
            v_hat = p.v / bc2
            p.value[...] = p.value - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()


def clip_grad_norm(params, max_norm):
    """Scale all gradients so their global L2 norm is at most ``max_norm``.

    ``max_norm`` of None or inf disables scaling. Returns the pre-clip norm.
    """
    plist = [p for _, p in params] if params and isinstance(params[0], tuple) else list(params)
    total = 0.0
    for p in plist:
        total += float(np.sum(p.grad * p.grad))
    norm = float(np.sqrt(total))
    if max_norm is None or not np.isfinite(max_norm):
        return norm
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    if norm > max_norm:
        scale = max_norm / norm
        for p in plist:
            p.grad[...] = p.grad * scale
    return norm
