"""Minimal reverse-mode autodiff over the ops the network needs.

A :class:`Tensor` wraps a numpy array. Ops record a backward closure on
their output only when some input is tracked (a parameter, or downstream
of one), so inference builds no graph at all. ``Tensor.backward()`` walks
the recorded graph in reverse topological order and accumulates ``grad``
on every tracked tensor.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .types import ConvParams, ShapeError


class RecordingError(RuntimeError):
    """Backward was requested on a tensor with no recorded forward graph."""


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def tracked(self) -> bool:
        return self.requires_grad or self._backward_fn is not None

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def __repr__(self):
        tag = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{tag})"

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Accumulate gradients into every tracked tensor below this node."""
        if self._backward_fn is None:
            raise RecordingError(
                "backward called on a tensor without a recorded forward graph"
            )
        if grad is None:
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.tracked() and id(p) not in seen:
                    stack.append((p, False))
        self.grad = grad if self.grad is None else self.grad + grad
        for node in reversed(order):
            if node._backward_fn is not None and node.grad is not None:
                node._backward_fn(node.grad)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = g
    else:
        t.grad = t.grad + g


def _result(data: np.ndarray, parents: tuple[Tensor, ...], make_backward) -> Tensor:
    out = Tensor(data)
    tracked = tuple(p for p in parents if p.tracked())
    if tracked:
        out._parents = tracked
        out._backward_fn = make_backward()
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# graph ops

def conv2d(
    x: Tensor,
    weights: Tensor,
    bias: Tensor | None = None,
    stride: int = 1,
    padding: int = 0,
    groups: int = 1,
) -> Tensor:
    params = ConvParams(
        weights=weights.data,
        bias=None if bias is None else bias.data,
        stride=stride,
        padding=padding,
        groups=groups,
    )
    out_data = ops.conv2d(x.data, params)
    parents = (x, weights) if bias is None else (x, weights, bias)

    def make_backward():
        def backward(gout):
            gx, gw, gb = ops.conv2d_backward(
                x.data,
                params,
                gout,
                need_input=x.tracked(),
                need_weight=weights.tracked(),
            )
            if gx is not None:
                _accumulate(x, gx)
            if gw is not None:
                _accumulate(weights, gw)
            if bias is not None and bias.tracked() and gb is not None:
                _accumulate(bias, gb)

        return backward

    return _result(out_data, parents, make_backward)


def linear(x: Tensor, weights: Tensor, bias: Tensor | None = None) -> Tensor:
    out_data = ops.linear(x.data, weights.data, None if bias is None else bias.data)
    parents = (x, weights) if bias is None else (x, weights, bias)

    def make_backward():
        def backward(gout):
            gx, gw, gb = ops.linear_backward(x.data, weights.data, gout, bias is not None)
            if x.tracked():
                _accumulate(x, gx)
            if weights.tracked():
                _accumulate(weights, gw)
            if bias is not None and bias.tracked() and gb is not None:
                _accumulate(bias, gb)

        return backward

    return _result(out_data, parents, make_backward)


def batchnorm(
    x: Tensor,
    scale: Tensor,
    shift: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool = False,
) -> Tensor:
    out_data, cache = ops.batchnorm_forward(
        x.data, scale.data, shift.data, running_mean, running_var, training
    )

    def make_backward():
        def backward(gout):
            gx, gscale, gshift = ops.batchnorm_backward(cache, gout)
            if x.tracked():
                _accumulate(x, gx)
            if scale.tracked():
                _accumulate(scale, gscale)
            if shift.tracked():
                _accumulate(shift, gshift)

        return backward

    return _result(out_data, (x, scale, shift), make_backward)


def _unary(x: Tensor, out_data: np.ndarray, grad_fn) -> Tensor:
    def make_backward():
        def backward(gout):
            _accumulate(x, grad_fn(gout))

        return backward

    return _result(out_data, (x,), make_backward)


def relu(x: Tensor) -> Tensor:
    return _unary(x, ops.relu(x.data), lambda g: ops.relu_backward(x.data, g))


def relu6(x: Tensor) -> Tensor:
    return _unary(x, ops.relu6(x.data), lambda g: ops.relu6_backward(x.data, g))


def sigmoid(x: Tensor) -> Tensor:
    y = ops.sigmoid(x.data)
    return _unary(x, y, lambda g: ops.sigmoid_backward(y, g))


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    y = ops.softmax(x.data, axis)
    return _unary(x, y, lambda g: ops.softmax_backward(y, g, axis))


def global_avg_pool(x: Tensor) -> Tensor:
    return _unary(
        x, ops.global_avg_pool(x.data), lambda g: ops.global_avg_pool_backward(x.shape, g)
    )


def global_max_pool(x: Tensor) -> Tensor:
    return _unary(
        x, ops.global_max_pool(x.data), lambda g: ops.global_max_pool_backward(x.data, g)
    )


def channel_avg(x: Tensor) -> Tensor:
    return _unary(x, ops.channel_avg(x.data), lambda g: ops.channel_avg_backward(x.shape, g))


def channel_max(x: Tensor) -> Tensor:
    return _unary(x, ops.channel_max(x.data), lambda g: ops.channel_max_backward(x.data, g))


def flatten(x: Tensor) -> Tensor:
    out_data = x.data.reshape(x.data.shape[0], -1)
    return _unary(x, out_data, lambda g: g.reshape(x.shape))


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    return _unary(x, x.data.reshape(shape), lambda g: g.reshape(x.shape))


def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def make_backward():
        def backward(gout):
            if a.tracked():
                _accumulate(a, _unbroadcast(gout, a.shape))
            if b.tracked():
                _accumulate(b, _unbroadcast(gout, b.shape))

        return backward

    return _result(out_data, (a, b), make_backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def make_backward():
        def backward(gout):
            if a.tracked():
                _accumulate(a, _unbroadcast(gout * b.data, a.shape))
            if b.tracked():
                _accumulate(b, _unbroadcast(gout * a.data, b.shape))

        return backward

    return _result(out_data, (a, b), make_backward)


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    out_data = np.concatenate([a.data, b.data], axis=1)
    ca = a.shape[1]

    def make_backward():
        def backward(gout):
            if a.tracked():
                _accumulate(a, gout[:, :ca])
            if b.tracked():
                _accumulate(b, gout[:, ca:])

        return backward

    return _result(out_data, (a, b), make_backward)


LOG_PROB_FLOOR = 1e-12


def cross_entropy_with_logits(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy of softmax(logits) against integer labels.

    Probabilities are floored at 1e-12 before the log. The backward pass is
    the fused softmax + cross-entropy gradient (p - y) / N.
    """
    z = logits.data
    if z.ndim != 2:
        raise ShapeError(f"logits must be (N, K), got shape {z.shape}")
    n, k = z.shape
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} does not match batch {n}")
    if labels.min() < 0 or labels.max() >= k:
        raise ShapeError(f"label out of range [0, {k}) in batch")
    shifted = z - z.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logsumexp
    picked = np.maximum(logp[np.arange(n), labels], np.log(LOG_PROB_FLOOR))
    loss = -picked.mean()

    probs = np.exp(logp)

    def make_backward():
        def backward(gout):
            g = probs.copy()
            g[np.arange(n), labels] -= 1.0
            g *= gout / n
            _accumulate(logits, g.astype(z.dtype, copy=False))

        return backward

    return _result(np.asarray(loss, dtype=z.dtype), (logits,), make_backward)
