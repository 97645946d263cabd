"""Low-altitude UAV airspace classification from 5G mmWave radio measurements.

Subpackages/modules map onto the pipeline stages:

- ``scene`` / ``signal_model`` / ``simulate``: synthetic measurement generation
- ``pipeline``: CSV ingestion, imputation, splits, windows, standardization
- ``nn`` / ``model``: differentiable layers and the CoBA classifier
- ``training`` / ``complexity``: epoch loop, metrics, operation counts
- ``fingerprint`` / ``baselines``: voxel benchmark, KNN and logistic regression
- ``cli``: the ``coba`` command
"""

from ._kernels import BACKEND
from .model import CobaConfig, CobaModel, lstm_only_variant
from .training import Metrics, TrainConfig, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CobaConfig",
    "CobaModel",
    "lstm_only_variant",
    "Metrics",
    "TrainConfig",
    "evaluate",
    "train",
    "__version__",
]
