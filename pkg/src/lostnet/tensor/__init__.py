from .types import ConvParams, ShapeError, conv_output_hw
from . import ops
from .autodiff import Tensor, RecordingError

__all__ = ["ConvParams", "ShapeError", "conv_output_hw", "ops", "Tensor", "RecordingError"]
