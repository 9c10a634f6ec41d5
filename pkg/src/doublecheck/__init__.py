"""Fake-news classification with a two-stage, salience-reweighted attention LSTM."""
__version__ = "0.1.0"

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import DoubleCheckError
from .kernels import BACKEND
from .metrics import MetricsReport, f_beta, length_split_eval, metrics_report, rpd
from .model import DoubleCheckModel, ModelConfig, doublecheck_forward
from .train import TrainConfig, train

__all__ = [
    "BACKEND", "DoubleCheckError", "DoubleCheckModel", "MetricsReport", "ModelConfig", "TrainConfig",
    "__version__", "doublecheck_forward", "f_beta", "length_split_eval", "load_checkpoint",
    "metrics_report", "rpd", "save_checkpoint", "train",
]
