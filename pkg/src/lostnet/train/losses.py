"""Classification loss."""

from __future__ import annotations

import numpy as np

from ..tensor.types import ShapeError

PROB_FLOOR = 1e-12
ROW_SUM_TOL = 1e-4


def cross_entropy(probabilities: np.ndarray, labels) -> float:
    """Mean negative log-probability of the true class.

    ``probabilities`` is (N, K) with rows summing to 1 (checked to 1e-4);
    values are floored at 1e-12 before the log so the loss stays finite.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 2:
        raise ShapeError(f"probabilities must be (N, K), got shape {p.shape}")
    n, k = p.shape
    sums = p.sum(axis=1)
    worst = np.abs(sums - 1.0).max() if n else 0.0
    if worst > ROW_SUM_TOL:
        raise ShapeError(f"probability rows must sum to 1 (worst deviation {worst:.3g})")
    y = np.asarray(labels)
    if y.shape != (n,):
        raise ShapeError(f"labels shape {y.shape} does not match batch {n}")
    if n and (y.min() < 0 or y.max() >= k):
        raise ShapeError(f"label out of range [0, {k})")
    picked = np.maximum(p[np.arange(n), y], PROB_FLOOR)
    return float(-np.log(picked).mean())
