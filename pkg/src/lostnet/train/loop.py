"""Two-phase transfer-learning trainer.

Phase 1 freezes the backbone (stem, inverted residuals, head conv) and
trains the classifier plus the attention gates; phase 2 unfreezes
everything. Each phase runs its own cosine decay and batch size. The whole
run is deterministic under the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..network.model import Network, NetworkSpec
from ..tensor import autodiff as ad
from .data import DatasetManifest, ImagePreprocessor, ManifestError
from .optim import cosine_lr, make_optimizer


@dataclass
class TrainConfig:
    freeze_epochs: int = 50
    freeze_batch: int = 32
    unfreeze_epochs: int = 400
    unfreeze_batch: int = 64
    init_lr: float = 1e-2
    min_lr: float | None = None  # defaults to init_lr / 100
    # scales the freeze-phase learning rate; the classifier head sits on
    # high-norm pooled features and tolerates far less than the backbone
    freeze_lr_scale: float = 1.0
    lr_decay: str = "cos"
    momentum: float = 0.9
    optimizer: str = "sgd"
    seed: int = 0
    rmsprop_decay: float = 0.99
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.freeze_epochs < 0 or self.unfreeze_epochs < 0:
            raise ValueError("epoch counts must be nonnegative")
        if self.freeze_batch < 1 or self.unfreeze_batch < 1:
            raise ValueError("batch sizes must be positive")
        if self.init_lr <= 0:
            raise ValueError("init_lr must be positive")
        if self.freeze_lr_scale <= 0:
            raise ValueError("freeze_lr_scale must be positive")
        if self.lr_decay != "cos":
            raise ValueError(f"unsupported lr decay {self.lr_decay!r}")
        if self.min_lr is None:
            self.min_lr = self.init_lr * 1e-2


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    phase: str
    lr: float
    loss: float
    val_accuracy: float

    def to_line(self) -> str:
        return f"{self.epoch}\t{self.phase}\t{self.lr!r}\t{self.loss!r}\t{self.val_accuracy!r}"

    @classmethod
    def from_line(cls, line: str) -> "EpochRecord":
        epoch, phase, lr, loss, acc = line.rstrip("\n").split("\t")
        return cls(int(epoch), phase, float(lr), float(loss), float(acc))


def write_history(records, path) -> None:
    Path(path).write_text("".join(r.to_line() + "\n" for r in records), encoding="utf-8")


def read_history(path) -> list[EpochRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [EpochRecord.from_line(l) for l in lines if l.strip()]


def _val_accuracy(network: Network, xs: np.ndarray, ys: np.ndarray, batch: int) -> float:
    correct = 0
    for i in range(0, len(xs), batch):
        logits = network.forward(xs[i : i + batch], training=False).data
        correct += int((logits.argmax(axis=1) == ys[i : i + batch]).sum())
    return correct / len(xs)


def train(
    spec: NetworkSpec,
    store: dict[str, np.ndarray],
    train_manifest: DatasetManifest,
    val_manifest: DatasetManifest,
    config: TrainConfig,
    preprocessor: ImagePreprocessor | None = None,
) -> tuple[dict[str, np.ndarray], list[EpochRecord]]:
    """Train in place on ``store``; returns it plus the per-epoch history."""
    if len(train_manifest) == 0 or len(val_manifest) == 0:
        raise ManifestError("training and validation manifests must be nonempty")
    if preprocessor is None:
        preprocessor = ImagePreprocessor(spec.input_resolution)
    x_train, y_train = preprocessor.load_manifest(train_manifest)
    x_val, y_val = preprocessor.load_manifest(val_manifest)

    network = Network(spec, store)
    rng = np.random.default_rng(config.seed)
    history: list[EpochRecord] = []
    epoch_counter = 0

    phases = (
        ("freeze", config.freeze_epochs, config.freeze_batch, network.freeze_backbone,
         config.freeze_lr_scale),
        ("unfreeze", config.unfreeze_epochs, config.unfreeze_batch, network.unfreeze_all, 1.0),
    )
    for phase, epochs, batch, set_phase, lr_scale in phases:
        if epochs == 0:
            continue
        set_phase()
        optimizer = make_optimizer(
            config.optimizer,
            network.trainable_parameters(),
            momentum=config.momentum,
            rmsprop_decay=config.rmsprop_decay,
            eps=config.eps,
            adam_beta1=config.adam_beta1,
            adam_beta2=config.adam_beta2,
        )
        for e in range(epochs):
            lr = cosine_lr(e, epochs, config.init_lr * lr_scale, config.min_lr * lr_scale)
            order = rng.permutation(len(x_train))
            batch_losses = []
            for i in range(0, len(order), batch):
                idx = order[i : i + batch]
                network.zero_grad()
                logits = network.forward(x_train[idx], training=True)
                loss = ad.cross_entropy_with_logits(logits, y_train[idx])
                loss.backward()
                optimizer.step(lr)
                batch_losses.append(float(loss.data))
            epoch_counter += 1
            history.append(
                EpochRecord(
                    epoch=epoch_counter,
                    phase=phase,
                    lr=lr,
                    loss=float(np.mean(batch_losses)),
                    val_accuracy=_val_accuracy(network, x_val, y_val, batch),
                )
            )
    return store, history
