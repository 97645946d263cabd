"""Central-difference verification of analytic gradients.

The harness perturbs tensor entries in place, re-evaluates a scalar loss, and
compares the two-sided difference quotient against the recorded analytic
gradient. Relative error uses a small floor so near-zero coordinates do not
blow up the ratio while corrupted gradients still stand out clearly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["finite_diff_check", "rel_error"]


def rel_error(analytic: float, numeric: float, floor: float = 1e-3) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def finite_diff_check(loss_fn, tensors, grads, step: float = 1e-5, floor: float = 1e-3,
                      max_coords: int = None, rng=None) -> float:
    """Max relative error between analytic and numeric gradients.

    loss_fn: re-evaluates the scalar loss with current tensor contents.
    tensors: arrays to perturb (parameter values and/or inputs).
    grads:   matching analytic gradient arrays, captured beforehand.
    max_coords: if set, check a random subset of coordinates per tensor
                (rng required) instead of every entry.
    """
    worst = 0.0
    for arr, grad in zip(tensors, grads):
        flat = arr.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        n = flat.size
        if max_coords is not None and n > max_coords:
            if rng is None:
                raise ValueError("sampling coordinates requires an rng")
            coords = rng.choice(n, size=max_coords, replace=False)
        else:
            coords = range(n)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + step
            lp = loss_fn()
            flat[i] = orig - step
            lm = loss_fn()
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * step)
            worst = max(worst, rel_error(float(gflat[i]), numeric, floor))
    return worst
