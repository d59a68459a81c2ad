"""Optimizer update rules and the cosine learning-rate schedule.

All step functions update the parameter and state arrays in place. State
arrays are created on first use; passing a state with the wrong shapes is
rejected.
"""

from __future__ import annotations

import math

import numpy as np

from ..tensor.types import ShapeError


def cosine_lr(epoch: int, total_epochs: int, init_lr: float, min_lr: float) -> float:
    """min_lr + 0.5 (init - min) (1 + cos(pi * epoch / (total_epochs - 1)))."""
    if not 0 <= epoch < total_epochs:
        raise ValueError(f"epoch {epoch} out of range [0, {total_epochs})")
    if total_epochs == 1:
        return init_lr
    return min_lr + 0.5 * (init_lr - min_lr) * (1.0 + math.cos(math.pi * epoch / (total_epochs - 1)))


def _check(param: np.ndarray, grad: np.ndarray, state: dict, keys: tuple[str, ...]) -> None:
    if param.shape != grad.shape:
        raise ShapeError(f"gradient shape {grad.shape} does not match parameter {param.shape}")
    for key in keys:
        if key not in state:
            state[key] = np.zeros_like(param)
        elif state[key].shape != param.shape:
            raise ShapeError(
                f"optimizer state {key!r} shape {state[key].shape} does not match "
                f"parameter {param.shape}"
            )


def sgd_step(param, grad, state, lr, momentum=0.9):
    """v <- momentum * v + g;  p <- p - lr * v."""
    _check(param, grad, state, ("velocity",))
    v = state["velocity"]
    v *= momentum
    v += grad
    param -= lr * v
    return param, state


def rmsprop_step(param, grad, state, lr, decay=0.99, eps=1e-8):
    """s <- decay * s + (1 - decay) * g^2;  p <- p - lr * g / (sqrt(s) + eps)."""
    _check(param, grad, state, ("square_avg",))
    s = state["square_avg"]
    s *= decay
    s += (1.0 - decay) * grad * grad
    param -= lr * grad / (np.sqrt(s) + eps)
    return param, state


def adam_step(param, grad, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Bias-corrected first/second moment update."""
    _check(param, grad, state, ("m", "v"))
    t = state.get("t", 0) + 1
    state["t"] = t
    m, v = state["m"], state["v"]
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return param, state


class Optimizer:
    """Applies one update rule across a named set of parameter tensors."""

    def __init__(self, step_fn, params, **hyper):
        self._step_fn = step_fn
        self._params = dict(params)
        self._state = {name: {} for name in self._params}
        self._hyper = hyper

    def step(self, lr: float) -> None:
        for name, tensor in self._params.items():
            if tensor.grad is None:
                continue
            self._step_fn(tensor.data, tensor.grad, self._state[name], lr, **self._hyper)


def make_optimizer(name: str, params, *, momentum=0.9, rmsprop_decay=0.99, eps=1e-8,
                   adam_beta1=0.9, adam_beta2=0.999) -> Optimizer:
    kind = name.strip().lower()
    if kind == "sgd":
        return Optimizer(sgd_step, params, momentum=momentum)
    if kind == "rmsprop":
        return Optimizer(rmsprop_step, params, decay=rmsprop_decay, eps=eps)
    if kind == "adam":
        return Optimizer(adam_step, params, beta1=adam_beta1, beta2=adam_beta2, eps=eps)
    raise ValueError(f"unknown optimizer {name!r}, expected sgd, rmsprop, or adam")
