"""Evaluation metrics: confusion matrix, accuracy/recall/precision, ROC/AUC.

The confusion matrix is laid out rows = predicted class, columns = actual
class. Recall and precision are one-vs-rest per class; a class that never
appears in the predictions has undefined precision and is reported as
``None``, never silently 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tensor import ops
from ..tensor.types import ShapeError
from .data import DatasetManifest, ImagePreprocessor, ManifestError
from .losses import cross_entropy


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (K, K) int64; rows = predicted, columns = actual

    @classmethod
    def from_pairs(cls, predicted, actual, num_classes: int) -> "ConfusionMatrix":
        predicted = np.asarray(predicted)
        actual = np.asarray(actual)
        if predicted.shape != actual.shape or predicted.ndim != 1:
            raise ShapeError(
                f"predicted {predicted.shape} and actual {actual.shape} must be equal 1-D"
            )
        for name, arr in (("predicted", predicted), ("actual", actual)):
            if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
                raise ShapeError(f"{name} label out of range [0, {num_classes})")
        counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        np.add.at(counts, (predicted, actual), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    def class_stats(self, k: int) -> tuple[int, int, int, int]:
        """One-vs-rest (tp, tn, fp, fn) for class k."""
        tp = int(self.counts[k, k])
        fp = int(self.counts[k].sum()) - tp  # predicted k, actually other
        fn = int(self.counts[:, k].sum()) - tp  # actually k, predicted other
        tn = self.total - tp - fp - fn
        return tp, tn, fp, fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class_accuracy: tuple[float, ...]
    per_class_recall: tuple[float | None, ...]
    per_class_precision: tuple[float | None, ...]
    macro_recall: float | None
    macro_precision: float | None
    loss: float | None = None
    ap: float | None = None
    epoch_accuracies: tuple[float, ...] = ()
    roc_points: tuple[tuple[tuple[float, float], ...] | None, ...] = ()
    auc: tuple[float | None, ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class_accuracy": list(self.per_class_accuracy),
            "per_class_recall": list(self.per_class_recall),
            "per_class_precision": list(self.per_class_precision),
            "macro_recall": self.macro_recall,
            "macro_precision": self.macro_precision,
            "loss": self.loss,
            "ap": self.ap,
            "auc": list(self.auc),
        }


def _defined_mean(values) -> float | None:
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None


def report_from_matrix(cm: ConfusionMatrix) -> MetricsReport:
    total = cm.total
    if total == 0:
        raise ShapeError("cannot compute metrics over zero samples")
    acc = float(np.trace(cm.counts)) / total
    per_acc, rec, prec = [], [], []
    for k in range(cm.num_classes):
        tp, tn, fp, fn = cm.class_stats(k)
        per_acc.append((tp + tn) / total)
        rec.append(tp / (tp + fn) if tp + fn else None)
        prec.append(tp / (tp + fp) if tp + fp else None)
    return MetricsReport(
        accuracy=acc,
        per_class_accuracy=tuple(per_acc),
        per_class_recall=tuple(rec),
        per_class_precision=tuple(prec),
        macro_recall=_defined_mean(rec),
        macro_precision=_defined_mean(prec),
    )


def average_accuracy(epoch_accuracies) -> float:
    """Mean of the per-epoch accuracies (the report's AP column)."""
    arr = np.asarray(epoch_accuracies, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need at least one epoch accuracy")
    return float(arr.mean())


def _roc_one_class(scores: np.ndarray, positive: np.ndarray):
    """ROC points and trapezoidal AUC; tied scores share one sweep step."""
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None, None
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = positive[order]
    points = [(0.0, 0.0)]
    auc = 0.0
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            j += 1
        tp_new = tp + int(p[i:j].sum())
        fp_new = fp + (j - i) - int(p[i:j].sum())
        x0, y0 = fp / n_neg, tp / n_pos
        x1, y1 = fp_new / n_neg, tp_new / n_pos
        auc += (x1 - x0) * (y0 + y1) / 2.0
        points.append((x1, y1))
        tp, fp = tp_new, fp_new
        i = j
    return tuple(points), auc


def roc_auc(scores: np.ndarray, labels):
    """One-vs-rest ROC per class; returns (points per class, auc per class).

    Classes with no positive (or no negative) samples get ``None``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ShapeError(f"scores must be (N, K), got {scores.shape}")
    if not np.isfinite(scores).all():
        raise ShapeError("scores must be finite")
    labels = np.asarray(labels)
    n, k = scores.shape
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} does not match scores {scores.shape}")
    points, aucs = [], []
    for c in range(k):
        pts, auc = _roc_one_class(scores[:, c], labels == c)
        points.append(pts)
        aucs.append(auc)
    return tuple(points), tuple(aucs)


def evaluate(
    network,
    manifest: DatasetManifest,
    preprocessor: ImagePreprocessor | None = None,
    batch_size: int = 32,
    epoch_accuracies=None,
) -> tuple[ConfusionMatrix, MetricsReport]:
    """Run the network over a manifest and compute the full metric suite."""
    if len(manifest) == 0:
        raise ManifestError("cannot evaluate an empty manifest")
    if preprocessor is None:
        preprocessor = ImagePreprocessor(network.spec.input_resolution)
    xs, ys = preprocessor.load_manifest(manifest)
    scores = predict_scores(network, xs, batch_size)
    predicted = scores.argmax(axis=1)
    cm = ConfusionMatrix.from_pairs(predicted, ys, len(manifest.classes))
    base = report_from_matrix(cm)
    roc_points, aucs = roc_auc(scores, ys)
    ap = average_accuracy(epoch_accuracies) if epoch_accuracies else None
    report = MetricsReport(
        accuracy=base.accuracy,
        per_class_accuracy=base.per_class_accuracy,
        per_class_recall=base.per_class_recall,
        per_class_precision=base.per_class_precision,
        macro_recall=base.macro_recall,
        macro_precision=base.macro_precision,
        loss=cross_entropy(scores, ys),
        ap=ap,
        epoch_accuracies=tuple(epoch_accuracies or ()),
        roc_points=roc_points,
        auc=aucs,
    )
    return cm, report


def predict_scores(network, xs: np.ndarray, batch_size: int = 32) -> np.ndarray:
    """Softmax scores (N, K) from inference-mode forward passes."""
    outs = []
    for i in range(0, len(xs), batch_size):
        logits = network.forward(xs[i : i + batch_size], training=False).data
        outs.append(ops.softmax(logits.astype(np.float64), axis=1))
    return np.concatenate(outs, axis=0)
