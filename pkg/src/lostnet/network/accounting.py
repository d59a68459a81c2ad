"""Parameter and FLOP accounting for the network.

Conventions (pinned so totals are comparable):
  - one multiply-accumulate (MAC) = 2 FLOPs
  - conv/linear bias: 1 FLOP per output element
  - batchnorm (folded scale+shift): 2 FLOPs per element
  - relu/relu6: 1 FLOP per element; sigmoid: 4 FLOPs per element
  - average pooling: one add per input element plus one divide per output;
    max pooling and channel pooling: one compare per input element
  - attention gating and residual adds: 1 FLOP per element
The ``macs`` column counts conv/linear multiply-accumulates only; ``flops``
includes everything. Counts are for batch size 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..tensor.types import ShapeError
from .model import NetworkSpec


@dataclass(frozen=True)
class LayerCost:
    name: str
    macs: int
    flops: int


def count_params(spec: NetworkSpec) -> int:
    """Number of trainable scalars (buffers like running stats excluded)."""
    total = 0
    for _, shape, kind in spec.param_entries():
        if kind == "param":
            n = 1
            for d in shape:
                n *= d
            total += n
    return total


def conv_layer_params(
    out_c: int, in_c_per_group: int, kh: int, kw: int, bias: bool = False, batchnorm: bool = True
) -> int:
    """Scalar parameters of one conv layer (+ optional bias and bn scale/shift)."""
    total = out_c * in_c_per_group * kh * kw
    if bias:
        total += out_c
    if batchnorm:
        total += 2 * out_c
    return total


def conv_macs(out_h: int, out_w: int, out_c: int, in_c_per_group: int, kh: int, kw: int) -> int:
    """Multiply-accumulates of one convolution at the given output size."""
    if min(out_h, out_w, out_c, in_c_per_group, kh, kw) <= 0:
        raise ShapeError("convolution cost requires positive dimensions")
    return out_h * out_w * out_c * in_c_per_group * kh * kw


def separable_ratio(df: int, dk: int, i: int, o: int) -> float:
    """Cost of a depthwise+pointwise pair relative to one standard convolution.

    (Df^2 Dk^2 I + Df^2 I O) / (Df^2 Dk^2 I O); approaches 1/Dk^2 for wide
    outputs, i.e. 1/9 for 3x3 kernels.
    """
    if min(df, dk, i, o) <= 0:
        raise ShapeError("separable_ratio requires positive dimensions")
    separable = df * df * dk * dk * i + df * df * i * o
    standard = df * df * dk * dk * i * o
    return separable / standard


def _conv_out(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def flops_breakdown(spec: NetworkSpec, input_resolution: int | None = None) -> list[LayerCost]:
    """Per-layer cost table for a single image forward pass."""
    res = spec.input_resolution if input_resolution is None else input_resolution
    if res <= 0:
        raise ShapeError(f"input resolution must be positive, got {res}")
    costs: list[LayerCost] = []

    def add(name: str, macs: int = 0, extra_flops: int = 0):
        costs.append(LayerCost(name, macs, 2 * macs + extra_flops))

    def conv_bn_act(prefix, h, w, out_c, in_c_per_group, k, act=True):
        elems = h * w * out_c
        add(f"{prefix}.conv", conv_macs(h, w, out_c, in_c_per_group, k, k))
        add(f"{prefix}.bn", 0, 2 * elems)
        if act:
            add(f"{prefix}.relu6", 0, elems)

    h = _conv_out(res, 3, 2, 1)
    conv_bn_act("stem", h, h, spec.stem_channels, 3, 3)

    # CBAM at the stem output
    c = spec.stem_channels
    hidden = c // spec.reduction_ratio
    spatial = h * h
    add("cbam.channel.pool", 0, 2 * c * spatial + c)  # avg sum+divide, max compares
    add("cbam.channel.mlp", 2 * (c * hidden + hidden * c), 2 * hidden + c + 4 * c)
    add("cbam.channel.gate", 0, c * spatial)
    add("cbam.spatial.pool", 0, 2 * c * spatial)
    k = spec.spatial_kernel
    add("cbam.spatial.conv", conv_macs(h, h, 1, 2, k, k), spatial + 4 * spatial)
    add("cbam.spatial.gate", 0, c * spatial)

    cur_c = c
    for i, cfg in enumerate(spec.blocks):
        name = spec.block_name(i)
        tc = cfg.expanded_channels
        if cfg.expansion_factor != 1:
            conv_bn_act(f"{name}.expand", h, h, tc, cfg.in_channels, 1)
        h = _conv_out(h, 3, cfg.stride, 1)
        conv_bn_act(f"{name}.depthwise", h, h, tc, 1, 3)
        conv_bn_act(f"{name}.project", h, h, cfg.out_channels, tc, 1, act=False)
        if cfg.has_shortcut:
            add(f"{name}.shortcut", 0, h * h * cfg.out_channels)
        cur_c = cfg.out_channels

    conv_bn_act("head", h, h, spec.last_channels, cur_c, 1)
    add("pool", 0, spec.last_channels * h * h + spec.last_channels)
    add("classifier", spec.last_channels * spec.num_classes, spec.num_classes)
    return costs


def count_flops(spec: NetworkSpec, input_resolution: int | None = None) -> int:
    """Total FLOPs of one single-image forward pass under the pinned convention."""
    return sum(c.flops for c in flops_breakdown(spec, input_resolution))


def count_macs(spec: NetworkSpec, input_resolution: int | None = None) -> int:
    """Total conv/linear multiply-accumulates of one single-image forward pass."""
    return sum(c.macs for c in flops_breakdown(spec, input_resolution))
