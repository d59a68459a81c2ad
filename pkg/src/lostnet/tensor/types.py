"""Shared tensor-level types and shape validation.

All network math runs on rank-4 numpy arrays laid out (batch, channel,
height, width), float32 by default and float64 when gradient checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeError(ValueError):
    """Raised when tensor shapes are inconsistent with an operation."""


def require_rank4(x: np.ndarray, what: str = "input") -> None:
    if x.ndim != 4:
        raise ShapeError(f"{what} must be rank-4 (N, C, H, W), got shape {x.shape}")


def conv_output_hw(h: int, w: int, kh: int, kw: int, stride: int, padding: int) -> tuple[int, int]:
    """Output spatial extents: floor((in + 2*padding - kernel) / stride) + 1."""
    if stride < 1:
        raise ShapeError(f"stride must be positive, got {stride}")
    if padding < 0:
        raise ShapeError(f"padding must be nonnegative, got {padding}")
    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise ShapeError(
            f"kernel ({kh}, {kw}) does not fit input ({h}, {w}) with padding {padding}"
        )
    return (h + 2 * padding - kh) // stride + 1, (w + 2 * padding - kw) // stride + 1


@dataclass
class ConvParams:
    """Convolution parameters.

    ``weights`` has shape (out_channels, in_channels_per_group, kh, kw);
    ``bias`` is per-out-channel or absent. ``groups`` splits channels:
    the depthwise case is groups == in_channels == out_channels with one
    input channel per group.
    """

    weights: np.ndarray
    bias: np.ndarray | None = None
    stride: int = 1
    padding: int = 0
    groups: int = 1

    def __post_init__(self):
        if self.weights.ndim != 4:
            raise ShapeError(
                f"conv weights must be rank-4 (O, C/g, kh, kw), got shape {self.weights.shape}"
            )
        if self.groups < 1:
            raise ShapeError(f"groups must be positive, got {self.groups}")
        out_channels = self.weights.shape[0]
        if out_channels % self.groups != 0:
            raise ShapeError(
                f"groups {self.groups} does not divide out_channels {out_channels}"
            )
        if self.bias is not None and self.bias.shape != (out_channels,):
            raise ShapeError(
                f"bias shape {self.bias.shape} does not match out_channels {out_channels}"
            )

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def kernel_hw(self) -> tuple[int, int]:
        return self.weights.shape[2], self.weights.shape[3]

    def in_channels(self) -> int:
        return self.weights.shape[1] * self.groups

    def check_input(self, x: np.ndarray) -> None:
        require_rank4(x)
        c = x.shape[1]
        if c != self.in_channels():
            raise ShapeError(
                f"input shape {x.shape} has {c} channels but weights "
                f"{self.weights.shape} with groups {self.groups} expect {self.in_channels()}"
            )
        if c % self.groups != 0:
            raise ShapeError(f"groups {self.groups} does not divide in_channels {c}")
        if x.dtype != self.weights.dtype:
            raise ShapeError(
                f"input dtype {x.dtype} does not match weights dtype {self.weights.dtype}"
            )

    def is_depthwise(self) -> bool:
        o, cg = self.weights.shape[:2]
        return cg == 1 and self.groups == o

    def is_pointwise(self) -> bool:
        return self.kernel_hw == (1, 1)
