"""CoBA: Convolutional + BiLSTM + Attention sequence classifier.

Graph (full variant), all lengths preserved until attention pools over time:

    x (B, L, f)
      -> Conv1d -> LayerNorm -> ReLU
      -> Conv1d -> LayerNorm -> ReLU        (B, L, c)
      -> BiLSTM                             (B, L, 2h)
      -> additive attention -> context      (B, 2h)
      -> Linear -> ReLU -> Dropout -> Linear
         + residual Linear(context)         (B, 2) logits

The ``lstm_only`` ablation replaces everything before the head with a single
unidirectional LSTM whose last hidden state feeds the same head shape, with
no attention and no residual path.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .checkpoint import CheckpointError, load_tensors, save_tensors
from .nn import (
    AdditiveAttention,
    BiLSTM,
    Conv1d,
    Dropout,
    LSTM,
    LayerNorm,
    Linear,
    ReLU,
    softmax,
)

__all__ = ["CobaConfig", "CobaModel", "lstm_only_variant"]

ABLATIONS = ("full", "lstm_only")


@dataclass
class CobaConfig:
    n_features: int = 7
    seq_len: int = 10
    cnn_channels: int = 64
    kernel_size: int = 3
    lstm_hidden: int = 64
    dropout: float = 0.3
    n_classes: int = 2
    ablation: str = "full"

    def __post_init__(self):
        if self.seq_len < 1 or self.cnn_channels < 1 or self.lstm_hidden < 1:
            raise ValueError("seq_len, cnn_channels and lstm_hidden must be >= 1")
        if self.kernel_size % 2 != 1:
            raise ValueError("kernel_size must be odd")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"ablation must be one of {ABLATIONS}")
        if self.n_classes != 2:
            raise ValueError("binary classifier: n_classes must be 2")


def lstm_only_variant(config: CobaConfig) -> CobaConfig:
    """The recurrent-only ablation of the same configuration."""
    cfg = CobaConfig(**{**asdict(config), "ablation": "lstm_only"})
    return cfg


class CobaModel:
    """Stateful module: forward caches activations for one backward pass.

    Parameters are read-only during inference and may be shared across
    threads; training (forward/backward pairs) is single-writer.
    """

    def __init__(self, config: CobaConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        c, h, f, k = config.cnn_channels, config.lstm_hidden, config.n_features, config.kernel_size

        if config.ablation == "full":
            self.conv1 = Conv1d(f, c, k, rng)
            self.ln1 = LayerNorm(c)
            self.relu1 = ReLU()
            self.conv2 = Conv1d(c, c, k, rng)
            self.ln2 = LayerNorm(c)
            self.relu2 = ReLU()
            self.bilstm = BiLSTM(c, h, rng)
            self.attention = AdditiveAttention(2 * h, rng)
            self.fc1 = Linear(2 * h, h, rng)
            self.relu3 = ReLU()
            self.drop = Dropout(config.dropout)
            self.fc2 = Linear(h, config.n_classes, rng)
            self.residual = Linear(2 * h, config.n_classes, rng)
        else:
            self.lstm = LSTM(f, h, rng)
            self.fc1 = Linear(h, h, rng)
            self.relu3 = ReLU()
            self.drop = Dropout(config.dropout)
            self.fc2 = Linear(h, config.n_classes, rng)
        self._last_seq_len = None

    # -- forward / backward ------------------------------------------------

    def forward(self, x, training: bool = False, rng=None):
        """Returns dict with logits (B, K), probs (B, K), alphas (B, L) or None."""
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 2
        if squeeze:
            x = x[None]
        if x.shape[2] != self.config.n_features:
            raise ValueError(
                f"input has {x.shape[2]} features, model expects {self.config.n_features}"
            )
        self._last_seq_len = x.shape[1]

        if self.config.ablation == "full":
            z = self.relu1.forward(self.ln1.forward(self.conv1.forward(x)))
            z = self.relu2.forward(self.ln2.forward(self.conv2.forward(z)))
            hs = self.bilstm.forward(z)
            context, alphas = self.attention.forward(hs)
        else:
            hs = self.lstm.forward(x)
            context = hs[:, -1]
            alphas = None

        z1 = self.relu3.forward(self.fc1.forward(context))
        z2 = self.drop.forward(z1, training=training, rng=rng)
        logits = self.fc2.forward(z2)
        if self.config.ablation == "full":
            logits = logits + self.residual.forward(context)

        out = {
            "logits": logits[0] if squeeze else logits,
            "probs": softmax(logits)[0] if squeeze else softmax(logits),
            "alphas": None,
        }
        if alphas is not None:
            out["alphas"] = alphas[0] if squeeze else alphas
        return out

    def backward(self, dlogits):
        """Accumulate parameter gradients for the most recent forward."""
        dlogits = np.atleast_2d(np.asarray(dlogits, dtype=float))
        dcontext = np.zeros((dlogits.shape[0], self.fc1.w.shape[0]))
        if self.config.ablation == "full":
            dcontext += self.residual.backward(dlogits)
        dz2 = self.fc2.backward(dlogits)
        dz1 = self.drop.backward(dz2)
        dcontext += self.fc1.backward(self.relu3.backward(dz1))

        if self.config.ablation == "full":
            dh = self.attention.backward(dcontext)
            dz = self.bilstm.backward(dh)
            dz = self.conv2.backward(self.ln2.backward(self.relu2.backward(dz)))
            dx = self.conv1.backward(self.ln1.backward(self.relu1.backward(dz)))
        else:
            dh = np.zeros((dlogits.shape[0], self._last_seq_len, self.config.lstm_hidden))
            dh[:, -1] = dcontext
            dx = self.lstm.backward(dh)
        return dx

    def predict(self, x):
        """Argmax class per window; an exact tie resolves to class 0."""
        x = np.asarray(x, dtype=float)
        out = self.forward(x, training=False)
        probs = np.atleast_2d(out["probs"])
        labels = (probs[:, 1] > probs[:, 0]).astype(int)
        return int(labels[0]) if x.ndim == 2 else labels

    # -- parameter plumbing ------------------------------------------------

    def _modules(self):
        if self.config.ablation == "full":
            return [
                ("conv1", self.conv1), ("ln1", self.ln1),
                ("conv2", self.conv2), ("ln2", self.ln2),
                ("bilstm", self.bilstm), ("attention", self.attention),
                ("fc1", self.fc1), ("fc2", self.fc2), ("residual", self.residual),
            ]
        return [("lstm", self.lstm), ("fc1", self.fc1), ("fc2", self.fc2)]

    def parameters(self):
        out = []
        for mod_name, mod in self._modules():
            for p_name, p in mod.parameters():
                out.append((f"{mod_name}.{p_name}", p))
        return out

    def zero_grad(self):
        for _, p in self.parameters():
            p.zero_grad()

    def parameter_count(self) -> int:
        return sum(p.value.size for _, p in self.parameters())

    def expected_parameter_count(self) -> int:
        """Closed-form count from the configuration (kept in sync by test)."""
        c, h, f, k = (
            self.config.cnn_channels,
            self.config.lstm_hidden,
            self.config.n_features,
            self.config.kernel_size,
        )
        n_cls = self.config.n_classes
        lstm = lambda cin: 4 * h * (cin + h) + 4 * h
        if self.config.ablation == "full":
            return (
                (c * f * k + c)            # conv1
                + 2 * c                    # ln1
                + (c * c * k + c)          # conv2
                + 2 * c                    # ln2
                + 2 * lstm(c)              # bilstm
                + (2 * h + 1)              # attention
                + (2 * h * h + h)          # fc1
                + (h * n_cls + n_cls)      # fc2
                + (2 * h * n_cls + n_cls)  # residual
            )
        return lstm(f) + (h * h + h) + (h * n_cls + n_cls)

    def describe(self) -> str:
        lines = [f"CoBA ({self.config.ablation}) — {self.parameter_count()} parameters"]
        for name, p in self.parameters():
            lines.append(f"  {name:24s} {str(tuple(p.shape)):16s} {p.value.size}")
        return "\n".join(lines)

    # -- persistence ---------------------------------------------------------

    def state_dict(self) -> dict:
        return {name: p.value for name, p in self.parameters()}

    def load_state_dict(self, tensors: dict):
        params = dict(self.parameters())
        for name, p in params.items():
            if name not in tensors:
                raise CheckpointError(f"checkpoint is missing tensor '{name}'")
            if tuple(tensors[name].shape) != tuple(p.shape):
                raise CheckpointError(
                    f"shape mismatch for '{name}': checkpoint {tensors[name].shape}, model {p.shape}"
                )
        for name, p in params.items():
            p.value[...] = tensors[name]

    def save(self, path):
        save_tensors(path, self.state_dict(), meta={"config": asdict(self.config)})

    @classmethod
    def load(cls, path) -> "CobaModel":
        tensors, meta = load_tensors(path)
        config = CobaConfig(**meta["config"])
        model = cls(config, seed=0)
        model.load_state_dict(tensors)
        return model
