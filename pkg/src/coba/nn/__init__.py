from .core import (
    Parameter,
    clamp_warnings,
    glorot_uniform,
    relu,
    softmax,
    weighted_cross_entropy,
)
from .gradcheck import finite_diff_check, rel_error
from .layers import (
    AdditiveAttention,
    BiLSTM,
    Conv1d,
    Dropout,
    LSTM,
    LayerNorm,
    Linear,
    ReLU,
)
from .optim import AdamW, clip_grad_norm

__all__ = [
    "Parameter",
    "glorot_uniform",
    "softmax",
    "relu",
    "weighted_cross_entropy",
    "clamp_warnings",
    "finite_diff_check",
    "rel_error",
    "Linear",
    "Conv1d",
    "LayerNorm",
    "ReLU",
    "Dropout",
    "LSTM",
    "BiLSTM",
    "AdditiveAttention",
    "AdamW",
    "clip_grad_norm",
]
