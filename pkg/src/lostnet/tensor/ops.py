"""Forward and backward tensor operations.

This is the functional surface the network is built from: convolutions
(standard / depthwise / pointwise), activations, batch normalization,
global and channel pooling, and the fully connected map. Every forward op
has a matching ``*_backward`` used by the autodiff tape.

Convolutions dispatch on the active backend (see :mod:`lostnet.backend`);
1x1 stride-1 convolutions route to a BLAS matmul under both backends
because that is the right kernel either way.
"""

from __future__ import annotations

import numpy as np

from .. import backend
from . import kernels_numpy
from .types import ConvParams, ShapeError, conv_output_hw, require_rank4

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


# ---------------------------------------------------------------------------
# convolution

def _pointwise_fast(x: np.ndarray, params: ConvParams) -> bool:
    return (
        params.kernel_hw == (1, 1)
        and params.stride == 1
        and params.padding == 0
        and params.groups == 1
    )


def _matmul_1x1_forward(x, w):
    # (N, C, H, W) x (O, C) -> (N, O, H, W)
    out = np.tensordot(x, w[:, :, 0, 0], axes=([1], [1]))  # N, H, W, O
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def conv2d(x: np.ndarray, params: ConvParams) -> np.ndarray:
    """2-D convolution (cross-correlation) with zero padding.

    Output spatial extents are floor((in + 2*padding - kernel)/stride) + 1.
    """
    params.check_input(x)
    kh, kw = params.kernel_hw
    ho, wo = conv_output_hw(x.shape[2], x.shape[3], kh, kw, params.stride, params.padding)
    if _pointwise_fast(x, params):
        out = _matmul_1x1_forward(x, params.weights)
    elif backend.active_backend() == "numba":
        from . import kernels_numba

        xp = kernels_numpy._pad(x, params.padding)
        out = kernels_numba.conv2d_forward(
            np.ascontiguousarray(xp), np.ascontiguousarray(params.weights), params.stride, ho, wo
        )
    else:
        out = kernels_numpy.conv2d_forward(
            x, params.weights, params.stride, params.padding, params.groups
        )
    if params.bias is not None:
        out += params.bias.reshape(1, -1, 1, 1)
    return out


def conv2d_backward(
    x: np.ndarray,
    params: ConvParams,
    gout: np.ndarray,
    need_input: bool = True,
    need_weight: bool = True,
):
    """Gradients of conv2d: returns (grad_input, grad_weights, grad_bias)."""
    gbias = gout.sum(axis=(0, 2, 3)) if params.bias is not None else None
    if _pointwise_fast(x, params):
        gx = gw = None
        if need_input:
            w2 = params.weights[:, :, 0, 0]
            gx = np.ascontiguousarray(
                np.tensordot(gout, w2, axes=([1], [0])).transpose(0, 3, 1, 2)
            )
        if need_weight:
            gw = np.einsum("nohw,nchw->oc", gout, x, optimize=True)
            gw = np.ascontiguousarray(gw[:, :, None, None])
        return gx, gw, gbias
    if backend.active_backend() == "numba":
        from . import kernels_numba

        xp = np.ascontiguousarray(kernels_numpy._pad(x, params.padding))
        gout_c = np.ascontiguousarray(gout)
        gx = gw = None
        if need_input:
            gxp = np.zeros_like(xp)
            kernels_numba.conv2d_backward_input(gout_c, params.weights, gxp, params.stride)
            p = params.padding
            gx = gxp[:, :, p : p + x.shape[2], p : p + x.shape[3]] if p else gxp
            gx = np.ascontiguousarray(gx)
        if need_weight:
            gw = np.zeros_like(params.weights)
            kernels_numba.conv2d_backward_weight(xp, gout_c, gw, params.stride)
        return gx, gw, gbias
    gx, gw = kernels_numpy.conv2d_backward(
        x,
        params.weights,
        params.stride,
        params.padding,
        params.groups,
        gout,
        need_input=need_input,
        need_weight=need_weight,
    )
    return gx, gw, gbias


def depthwise_conv2d(x: np.ndarray, params: ConvParams) -> np.ndarray:
    """Per-channel convolution: one kernel per channel, no channel mixing."""
    if not params.is_depthwise():
        raise ShapeError(
            f"weights {params.weights.shape} with groups {params.groups} are not a "
            "depthwise configuration (need groups == in_channels == out_channels)"
        )
    return conv2d(x, params)


def pointwise_conv2d(x: np.ndarray, params: ConvParams) -> np.ndarray:
    """1x1 convolution: a per-pixel linear map across channels."""
    if not params.is_pointwise():
        raise ShapeError(f"pointwise convolution requires a 1x1 kernel, got {params.kernel_hw}")
    return conv2d(x, params)


# ---------------------------------------------------------------------------
# activations

def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, gout: np.ndarray) -> np.ndarray:
    return gout * (x > 0)


def relu6(x: np.ndarray) -> np.ndarray:
    """Clamp to [0, 6]."""
    return np.clip(x, 0, 6)


def relu6_backward(x: np.ndarray, gout: np.ndarray) -> np.ndarray:
    return gout * ((x > 0) & (x < 6))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    # keep the codomain open even where exp saturates
    info = np.finfo(out.dtype)
    one = out.dtype.type(1)
    return np.clip(out, info.tiny, np.nextafter(one, out.dtype.type(0)))


def sigmoid_backward(y: np.ndarray, gout: np.ndarray) -> np.ndarray:
    # y is the forward output
    return gout * y * (1.0 - y)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Softmax along ``axis``; the per-slice maximum is subtracted first."""
    shifted = x - x.max(axis=axis, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=axis, keepdims=True)


def softmax_backward(y: np.ndarray, gout: np.ndarray, axis: int = -1) -> np.ndarray:
    inner = (gout * y).sum(axis=axis, keepdims=True)
    return y * (gout - inner)


# ---------------------------------------------------------------------------
# batch normalization

def _check_bn_shapes(x, scale, shift, running_mean, running_var):
    require_rank4(x)
    c = x.shape[1]
    for name, arr in (
        ("scale", scale),
        ("shift", shift),
        ("running_mean", running_mean),
        ("running_var", running_var),
    ):
        if arr.shape != (c,):
            raise ShapeError(
                f"batchnorm {name} shape {arr.shape} does not match channel count {c}"
            )
    if np.any(running_var < 0):
        raise ShapeError("batchnorm running_var must be nonnegative")


def batchnorm(
    x: np.ndarray,
    scale: np.ndarray,
    shift: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool = False,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> np.ndarray:
    """Per-channel batch normalization.

    Inference mode normalizes with the running statistics. Training mode
    normalizes with the batch statistics (biased variance) and updates the
    running arrays in place: running <- (1 - momentum) * running + momentum * batch.
    """
    out, _ = batchnorm_forward(x, scale, shift, running_mean, running_var, training, momentum, eps)
    return out


def batchnorm_forward(x, scale, shift, running_mean, running_var, training, momentum=BN_MOMENTUM, eps=BN_EPS):
    _check_bn_shapes(x, scale, shift, running_mean, running_var)
    if training:
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var
    else:
        mean = running_mean
        var = running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean.reshape(1, -1, 1, 1)) * inv_std.reshape(1, -1, 1, 1)
    out = xhat * scale.reshape(1, -1, 1, 1) + shift.reshape(1, -1, 1, 1)
    cache = (xhat, inv_std, scale, training)
    return out.astype(x.dtype, copy=False), cache


def batchnorm_backward(cache, gout: np.ndarray):
    """Returns (grad_input, grad_scale, grad_shift)."""
    xhat, inv_std, scale, training = cache
    gscale = (gout * xhat).sum(axis=(0, 2, 3))
    gshift = gout.sum(axis=(0, 2, 3))
    gxhat = gout * scale.reshape(1, -1, 1, 1)
    if training:
        # batch statistics depend on x, so the mean/variance terms matter
        m = gout.shape[0] * gout.shape[2] * gout.shape[3]
        sum_g = gxhat.sum(axis=(0, 2, 3), keepdims=True)
        sum_gx = (gxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
        gx = (gxhat - sum_g / m - xhat * sum_gx / m) * inv_std.reshape(1, -1, 1, 1)
    else:
        gx = gxhat * inv_std.reshape(1, -1, 1, 1)
    return gx.astype(gout.dtype, copy=False), gscale, gshift


# ---------------------------------------------------------------------------
# pooling

def _check_spatial(x):
    require_rank4(x)
    if x.shape[2] == 0 or x.shape[3] == 0:
        raise ShapeError(f"cannot pool over empty spatial extents, shape {x.shape}")


def _check_channel(x):
    require_rank4(x)
    if x.shape[1] == 0:
        raise ShapeError(f"cannot pool over empty channel extent, shape {x.shape}")


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """Mean over the spatial axes, output (N, C, 1, 1)."""
    _check_spatial(x)
    return x.mean(axis=(2, 3), keepdims=True)


def global_avg_pool_backward(x_shape, gout: np.ndarray) -> np.ndarray:
    area = x_shape[2] * x_shape[3]
    return np.broadcast_to(gout / area, x_shape).copy()


def global_max_pool(x: np.ndarray) -> np.ndarray:
    """Maximum over the spatial axes, output (N, C, 1, 1)."""
    _check_spatial(x)
    return x.max(axis=(2, 3), keepdims=True)


def global_max_pool_backward(x: np.ndarray, gout: np.ndarray) -> np.ndarray:
    n, c, h, w = x.shape
    flat = x.reshape(n, c, -1)
    idx = flat.argmax(axis=2)  # first maximum wins on ties
    gx = np.zeros_like(flat)
    np.put_along_axis(gx, idx[:, :, None], gout.reshape(n, c, 1), axis=2)
    return gx.reshape(x.shape)


def channel_avg(x: np.ndarray) -> np.ndarray:
    """Mean over the channel axis, output (N, 1, H, W)."""
    _check_channel(x)
    return x.mean(axis=1, keepdims=True)


def channel_avg_backward(x_shape, gout: np.ndarray) -> np.ndarray:
    return np.broadcast_to(gout / x_shape[1], x_shape).copy()


def channel_max(x: np.ndarray) -> np.ndarray:
    """Maximum over the channel axis, output (N, 1, H, W)."""
    _check_channel(x)
    return x.max(axis=1, keepdims=True)


def channel_max_backward(x: np.ndarray, gout: np.ndarray) -> np.ndarray:
    idx = x.argmax(axis=1, keepdims=True)
    gx = np.zeros_like(x)
    np.put_along_axis(gx, idx, gout, axis=1)
    return gx


# ---------------------------------------------------------------------------
# fully connected

def _as_rows(x: np.ndarray) -> np.ndarray:
    # accept (N, F) or (N, C, H, W); trailing axes flatten into features
    if x.ndim == 2:
        return x
    return x.reshape(x.shape[0], -1)


def linear(x: np.ndarray, weights: np.ndarray, bias: np.ndarray | None = None) -> np.ndarray:
    """Affine map per batch row; ``weights`` is (in_features, out_features)."""
    rows = _as_rows(x)
    if rows.shape[1] != weights.shape[0]:
        raise ShapeError(
            f"input features {rows.shape} do not match weights {weights.shape}"
        )
    out = rows @ weights
    if bias is not None:
        if bias.shape != (weights.shape[1],):
            raise ShapeError(
                f"bias shape {bias.shape} does not match out_features {weights.shape[1]}"
            )
        out = out + bias
    return out


def linear_backward(x: np.ndarray, weights: np.ndarray, gout: np.ndarray, has_bias: bool):
    """Returns (grad_input, grad_weights, grad_bias)."""
    rows = _as_rows(x)
    gx = (gout @ weights.T).reshape(x.shape)
    gw = rows.T @ gout
    gb = gout.sum(axis=0) if has_bias else None
    return gx, gw, gb
