"""Training loop (weighted sampling, clipped AdamW) and evaluation metrics."""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field

import numpy as np

from ._kernels import blas_single_thread
from .model import CobaModel
from .nn import AdamW, clip_grad_norm, weighted_cross_entropy
from .pipeline import class_weights, sampler_probabilities

__all__ = ["TrainConfig", "EpochReport", "Metrics", "evaluate", "train", "TrainingDiverged"]


class TrainingDiverged(ArithmeticError):
    """Raised when the loss goes non-finite; carries the failing step context."""


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    lr: float = 1e-4
    weight_decay: float = 0.01
    max_grad_norm: float = 1.0
    seed: int = 0
    weighted: bool = True   # weighted sampler + weighted loss; False is the ablation

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class Metrics:
    """Confusion counts with class 1 (restricted) as positive, plus scores.

    Fractions with zero denominators are reported as 0.0 and recorded in
    ``flags`` instead of raising.
    """

    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: list = field(default_factory=list)

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "Metrics":
        y_true = np.asarray(y_true).astype(int)
        y_pred = np.asarray(y_pred).astype(int)
        if y_true.size == 0:
            raise ValueError("cannot score an empty dataset")
        tp = int(np.sum((y_pred == 1) & (y_true == 1)))
        fp = int(np.sum((y_pred == 1) & (y_true == 0)))
        fn = int(np.sum((y_pred == 0) & (y_true == 1)))
        tn = int(np.sum((y_pred == 0) & (y_true == 0)))
        flags = []
        accuracy = (tp + tn) / (tp + fp + fn + tn)
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            precision = 0.0
            flags.append("precision_undefined")
        if tp + fn > 0:
            recall = tp / (tp + fn)
        else:
            recall = 0.0
            flags.append("recall_undefined")
        if precision + recall > 0:
            f1 = 2.0 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
            flags.append("f1_undefined")
        return cls(tp=tp, fp=fp, fn=fn, tn=tn, accuracy=accuracy,
                   precision=precision, recall=recall, f1=f1, flags=flags)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1, "flags": list(self.flags),
        }


@dataclass
class EpochReport:
    epoch: int
    train_loss: float
    val_loss: float
    val_metrics: Metrics
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "val": self.val_metrics.to_dict(),
            "wall_time_s": self.wall_time_s,
        }


def _batched_forward(model: CobaModel, x, batch_size=512):
    probs = []
    with blas_single_thread():
        for start in range(0, len(x), batch_size):
            out = model.forward(x[start:start + batch_size], training=False)
            probs.append(np.atleast_2d(out["probs"]))
    return np.concatenate(probs, axis=0)


def evaluate(model: CobaModel, x, y, weights=None):
    """Metrics plus mean loss on a windowed dataset, eval mode."""
    y = np.asarray(y).astype(int)
    if len(y) == 0:
        raise ValueError("cannot evaluate an empty dataset")
    probs = _batched_forward(model, np.asarray(x, dtype=float))
    w = np.ones(probs.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    loss, _ = weighted_cross_entropy(probs, y, w)
    preds = (probs[:, 1] > probs[:, 0]).astype(int)
    return Metrics.from_predictions(y, preds), loss


def train(model: CobaModel, train_set, val_set, cfg: TrainConfig):
    """Run the epoch loop and return (reports, best_state).

    train_set / val_set: (windows (N, L, f), labels (N,)) tuples. Every epoch
    draws N windows with replacement according to the class-balancing sampler
    (plain shuffling when ``cfg.weighted`` is off), steps clipped AdamW, then
    scores the validation split. The best-validation-accuracy parameters are
    restored into the model before returning.
    """
    x_train, y_train = train_set
    x_val, y_val = val_set
    x_train = np.asarray(x_train, dtype=float)
    y_train = np.asarray(y_train).astype(int)
    n = len(y_train)

    if cfg.weighted:
        w_loss = class_weights(y_train)
        p_sample = sampler_probabilities(y_train, w_loss)
    else:
        w_loss = np.ones(2)
        p_sample = None

    sample_rng = np.random.default_rng([cfg.seed, 1])
    dropout_rng = np.random.default_rng([cfg.seed, 2])

    opt = AdamW(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    reports = []
    best_acc = -1.0
    best_state = None

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        if cfg.weighted:
            order = sample_rng.choice(n, size=n, replace=True, p=p_sample)
        else:
            order = sample_rng.permutation(n)

        batch_losses = []
        with blas_single_thread():
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                out = model.forward(x_train[idx], training=True, rng=dropout_rng)
                loss, dlogits = weighted_cross_entropy(out["probs"], y_train[idx], w_loss)
                if not np.isfinite(loss):
                    grad_norm = clip_grad_norm(model.parameters(), None)
                    raise TrainingDiverged(
                        f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}"
                        f" (last grad norm {grad_norm:.3e})"
                    )
                model.zero_grad()
                model.backward(dlogits)
                clip_grad_norm(model.parameters(), cfg.max_grad_norm)
                opt.step()
                batch_losses.append(loss)

        val_metrics, val_loss = evaluate(model, x_val, y_val, weights=w_loss)
        reports.append(
            EpochReport(
                epoch=epoch,
                train_loss=float(np.mean(batch_losses)),
                val_loss=val_loss,
                val_metrics=val_metrics,
                wall_time_s=time.perf_counter() - t0,
            )
        )
        if val_metrics.accuracy > best_acc:
            best_acc = val_metrics.accuracy
            best_state = copy.deepcopy(model.state_dict())

    if best_state is not None:
        model.load_state_dict(best_state)
    return reports, model.state_dict()
