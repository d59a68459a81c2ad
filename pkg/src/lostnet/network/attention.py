"""Channel and spatial attention gating (the CBAM block).

Channel attention: sigmoid(MLP(avgpool(F)) + MLP(maxpool(F))), a shared
bias-free two-layer MLP with a ReLU in between, squeezing C -> C/r -> C.
Spatial attention: sigmoid(conv_kxk(concat(channel-avg F, channel-max F)))
with padding (k-1)/2 so the spatial extent is preserved. The full block
gates the feature map with the channel map first, then the spatial map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tensor import autodiff as ad
from ..tensor.types import ConvParams, ShapeError


@dataclass
class ChannelAttentionParams:
    """Bias-free squeeze/expand MLP weights; reduction_ratio must divide C."""

    reduce_weights: np.ndarray  # (C, C/r)
    expand_weights: np.ndarray  # (C/r, C)
    reduction_ratio: int

    def __post_init__(self):
        c, hidden = self.reduce_weights.shape
        if self.reduction_ratio < 1 or c % self.reduction_ratio != 0:
            raise ShapeError(
                f"reduction ratio {self.reduction_ratio} does not divide channels {c}"
            )
        if hidden != c // self.reduction_ratio:
            raise ShapeError(
                f"reduce weights {self.reduce_weights.shape} inconsistent with "
                f"ratio {self.reduction_ratio}"
            )
        if self.expand_weights.shape != (hidden, c):
            raise ShapeError(
                f"expand weights {self.expand_weights.shape} do not mirror "
                f"reduce weights {self.reduce_weights.shape}"
            )

    @property
    def channels(self) -> int:
        return self.reduce_weights.shape[0]


@dataclass
class SpatialAttentionParams:
    """A single 2-in 1-out square conv; kernel odd, padding (k-1)/2."""

    conv: ConvParams

    def __post_init__(self):
        o, ci, kh, kw = self.conv.weights.shape
        if (o, ci) != (1, 2):
            raise ShapeError(
                f"spatial attention conv must map 2 channels to 1, got weights "
                f"{self.conv.weights.shape}"
            )
        if kh != kw or kh % 2 == 0:
            raise ShapeError(f"spatial attention kernel must be square and odd, got {kh}x{kw}")
        if self.conv.padding != (kh - 1) // 2 or self.conv.stride != 1 or self.conv.groups != 1:
            raise ShapeError(
                "spatial attention conv must use stride 1, groups 1 and padding (k-1)/2"
            )


@dataclass
class CbamParams:
    channel: ChannelAttentionParams
    spatial: SpatialAttentionParams


# ---------------------------------------------------------------------------
# graph-level building blocks (shared by the functional API and the network)

def channel_attention_graph(f: ad.Tensor, w0: ad.Tensor, w1: ad.Tensor) -> ad.Tensor:
    """Per-channel gate in (0,1), shape (N, C, 1, 1)."""
    n, c = f.shape[0], f.shape[1]
    avg = ad.flatten(ad.global_avg_pool(f))
    mx = ad.flatten(ad.global_max_pool(f))

    def mlp(v: ad.Tensor) -> ad.Tensor:
        return ad.linear(ad.relu(ad.linear(v, w0)), w1)

    gate = ad.sigmoid(ad.add(mlp(avg), mlp(mx)))
    return ad.reshape(gate, (n, c, 1, 1))


def spatial_attention_graph(
    f: ad.Tensor, conv_w: ad.Tensor, conv_b: ad.Tensor | None, padding: int
) -> ad.Tensor:
    """Per-pixel gate in (0,1), shape (N, 1, H, W)."""
    desc = ad.concat_channels(ad.channel_avg(f), ad.channel_max(f))
    return ad.sigmoid(ad.conv2d(desc, conv_w, conv_b, stride=1, padding=padding))


def cbam_graph(
    f: ad.Tensor,
    w0: ad.Tensor,
    w1: ad.Tensor,
    conv_w: ad.Tensor,
    conv_b: ad.Tensor | None,
    padding: int,
) -> ad.Tensor:
    gated = ad.mul(f, channel_attention_graph(f, w0, w1))
    return ad.mul(gated, spatial_attention_graph(gated, conv_w, conv_b, padding))


# ---------------------------------------------------------------------------
# functional surface on plain arrays

def _check_channels(feature: np.ndarray, params: ChannelAttentionParams) -> None:
    if feature.ndim != 4 or feature.shape[1] != params.channels:
        raise ShapeError(
            f"feature shape {feature.shape} does not match attention over "
            f"{params.channels} channels"
        )


def channel_attention(feature: np.ndarray, params: ChannelAttentionParams) -> np.ndarray:
    """Channel gate values, shape (N, C, 1, 1), every value strictly in (0,1)."""
    _check_channels(feature, params)
    return channel_attention_graph(
        ad.Tensor(feature), ad.Tensor(params.reduce_weights), ad.Tensor(params.expand_weights)
    ).data


def spatial_attention(feature: np.ndarray, params: SpatialAttentionParams) -> np.ndarray:
    """Spatial gate values, shape (N, 1, H, W)."""
    conv = params.conv
    bias = None if conv.bias is None else ad.Tensor(conv.bias)
    return spatial_attention_graph(
        ad.Tensor(feature), ad.Tensor(conv.weights), bias, conv.padding
    ).data


def apply_channel_map(feature: np.ndarray, gate: np.ndarray) -> np.ndarray:
    """Broadcast-multiply a (N, C, 1, 1) gate over the feature map."""
    return feature * gate


def apply_spatial_map(feature: np.ndarray, gate: np.ndarray) -> np.ndarray:
    """Broadcast-multiply a (N, 1, H, W) gate over the feature map."""
    return feature * gate


def cbam_apply(
    feature: np.ndarray, ch: ChannelAttentionParams, sp: SpatialAttentionParams
) -> np.ndarray:
    """Channel gate then spatial gate; output shape equals input shape."""
    gated = apply_channel_map(feature, channel_attention(feature, ch))
    return apply_spatial_map(gated, spatial_attention(gated, sp))
