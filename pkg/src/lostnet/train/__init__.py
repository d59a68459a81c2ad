from .data import (
    DEFAULT_CLASSES,
    DEFAULT_NORM_MEAN,
    DEFAULT_NORM_STD,
    DatasetManifest,
    ImagePreprocessor,
    ManifestError,
    read_classes,
    read_manifest,
    split_dataset,
    write_classes,
    write_manifest,
)
from .losses import cross_entropy
from .optim import Optimizer, adam_step, cosine_lr, make_optimizer, rmsprop_step, sgd_step
from .metrics import ConfusionMatrix, MetricsReport, average_accuracy, evaluate, roc_auc
from .loop import EpochRecord, TrainConfig, read_history, train, write_history

__all__ = [
    "DEFAULT_CLASSES",
    "DEFAULT_NORM_MEAN",
    "DEFAULT_NORM_STD",
    "ConfusionMatrix",
    "DatasetManifest",
    "EpochRecord",
    "ImagePreprocessor",
    "ManifestError",
    "MetricsReport",
    "Optimizer",
    "TrainConfig",
    "adam_step",
    "average_accuracy",
    "cosine_lr",
    "cross_entropy",
    "evaluate",
    "make_optimizer",
    "read_classes",
    "read_history",
    "read_manifest",
    "rmsprop_step",
    "roc_auc",
    "sgd_step",
    "split_dataset",
    "train",
    "write_classes",
    "write_history",
    "write_manifest",
]
