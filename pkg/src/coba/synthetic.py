"""Synthetic window sets with known Bayes structure, for sanity training runs.

Windows are Gaussian: a per-window latent offset shared across every time
step (so window averaging cannot wash the ambiguity out) plus independent
per-step noise. Class 1 adds ``shift`` to every feature. With
``latent_sigma`` dominating, the Bayes-optimal balanced-prior accuracy is
Phi(shift / (2 * sigma_eff)), which makes recall targets easy to place.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gaussian_windows"]


def gaussian_windows(n_windows, seq_len, n_features, class1_frac, shift,
                     latent_sigma=1.0, step_sigma=1.0, seed=0):
    """Returns (x (N, L, f), y (N,)) with an exact class-1 fraction."""
    rng = np.random.default_rng(seed)
    n1 = int(round(class1_frac * n_windows))
    y = np.zeros(n_windows, dtype=int)
    y[:n1] = 1
    rng.shuffle(y)

    latent = rng.normal(0.0, latent_sigma, size=n_windows)
    x = rng.normal(0.0, step_sigma, size=(n_windows, seq_len, n_features))
    x += latent[:, None, None]
    x += (y * shift)[:, None, None]
    return x, y
