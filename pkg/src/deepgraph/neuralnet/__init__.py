from .adam import AdamState, adam_step
from .checkpoint import load_checkpoint, save_checkpoint
from .layers import MrConvLayer, mrconv_forward, output_rows
from .model import Architecture, McMrConvModel, model_forward
from .training import GradientReport, TrainConfig, TrainResult, check_gradients, train

__all__ = [
    "AdamState", "adam_step", "load_checkpoint", "save_checkpoint", "MrConvLayer",
    "mrconv_forward", "output_rows", "Architecture", "McMrConvModel", "model_forward",
    "GradientReport", "TrainConfig", "TrainResult", "check_gradients", "train",
]
