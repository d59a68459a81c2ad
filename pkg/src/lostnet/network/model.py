"""Network assembly: stem conv, one CBAM, inverted-residual stack, classifier.

:class:`NetworkSpec` is the declarative layer table (shapes only);
a :class:`Network` binds a spec to a weight store and runs forward passes.
The weight store is a plain ordered ``dict[str, np.ndarray]`` so it can be
serialized, diffed, and updated in place by the optimizers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from ..tensor import autodiff as ad
from ..tensor.types import ShapeError
from . import attention

# (expansion t, out channels c, repeats n, first stride s)
BOTTLENECK_SCHEDULE = (
    (1, 16, 1, 1),
    (6, 24, 2, 2),
    (6, 32, 3, 2),
    (6, 64, 4, 2),
    (6, 96, 3, 1),
    (6, 160, 3, 2),
    (6, 320, 1, 1),
)


@dataclass(frozen=True)
class InvertedResidualConfig:
    in_channels: int
    out_channels: int
    stride: int
    expansion_factor: int

    def __post_init__(self):
        if self.stride not in (1, 2):
            raise ShapeError(f"inverted residual stride must be 1 or 2, got {self.stride}")
        if self.expansion_factor < 1:
            raise ShapeError(f"expansion factor must be positive, got {self.expansion_factor}")

    @property
    def expanded_channels(self) -> int:
        return self.in_channels * self.expansion_factor

    @property
    def has_shortcut(self) -> bool:
        return self.stride == 1 and self.in_channels == self.out_channels


@dataclass(frozen=True)
class NetworkSpec:
    """Layer table of the classifier network."""

    num_classes: int
    input_resolution: int = 224
    reduction_ratio: int = 16
    spatial_kernel: int = 7
    stem_channels: int = 32
    last_channels: int = 1280
    blocks: tuple[InvertedResidualConfig, ...] = ()

    def block_name(self, index: int) -> str:
        return f"block{index:02d}"

    def param_entries(self) -> Iterator[tuple[str, tuple[int, ...], str]]:
        """Yield (name, shape, kind) for every tensor; kind is param or buffer."""
        yield from _conv_bn_entries("stem", (self.stem_channels, 3, 3, 3))
        c = self.stem_channels
        hidden = c // self.reduction_ratio
        k = self.spatial_kernel
        yield "cbam.channel.reduce.weight", (c, hidden), "param"
        yield "cbam.channel.expand.weight", (hidden, c), "param"
        yield "cbam.spatial.conv.weight", (1, 2, k, k), "param"
        yield "cbam.spatial.conv.bias", (1,), "param"
        for i, cfg in enumerate(self.blocks):
            name = self.block_name(i)
            tc = cfg.expanded_channels
            if cfg.expansion_factor != 1:
                yield from _conv_bn_entries(f"{name}.expand", (tc, cfg.in_channels, 1, 1))
            yield from _conv_bn_entries(f"{name}.depthwise", (tc, 1, 3, 3))
            yield from _conv_bn_entries(f"{name}.project", (cfg.out_channels, tc, 1, 1))
        yield from _conv_bn_entries("head", (self.last_channels, self.blocks[-1].out_channels, 1, 1))
        yield "classifier.weight", (self.last_channels, self.num_classes), "param"
        yield "classifier.bias", (self.num_classes,), "param"


def _conv_bn_entries(prefix: str, wshape: tuple[int, ...]):
    c = wshape[0]
    yield f"{prefix}.conv.weight", wshape, "param"
    yield f"{prefix}.bn.scale", (c,), "param"
    yield f"{prefix}.bn.shift", (c,), "param"
    yield f"{prefix}.bn.running_mean", (c,), "buffer"
    yield f"{prefix}.bn.running_var", (c,), "buffer"


def build_network(num_classes: int, input_resolution: int = 224) -> NetworkSpec:
    """The canonical layer schedule with one CBAM right after the stem."""
    if num_classes < 1:
        raise ShapeError(f"num_classes must be >= 1, got {num_classes}")
    blocks = []
    c_in = 32
    for t, c, n, s in BOTTLENECK_SCHEDULE:
        for i in range(n):
            blocks.append(
                InvertedResidualConfig(
                    in_channels=c_in,
                    out_channels=c,
                    stride=s if i == 0 else 1,
                    expansion_factor=t,
                )
            )
            c_in = c
    return NetworkSpec(
        num_classes=num_classes,
        input_resolution=input_resolution,
        blocks=tuple(blocks),
    )


def validate_store(spec: NetworkSpec, store: Mapping[str, np.ndarray]) -> None:
    """Every spec tensor present exactly once with the right shape; no strays."""
    expected = {name: shape for name, shape, _ in spec.param_entries()}
    for name, shape in expected.items():
        if name not in store:
            raise ShapeError(f"weight store is missing parameter {name!r}")
        if tuple(store[name].shape) != shape:
            raise ShapeError(
                f"parameter {name!r} has shape {tuple(store[name].shape)}, expected {shape}"
            )
    strays = set(store) - set(expected)
    if strays:
        raise ShapeError(f"weight store has unexpected entries: {sorted(strays)}")


def init_weights(spec: NetworkSpec, seed: int = 0, dtype=np.float32) -> dict[str, np.ndarray]:
    """Fan-in-scaled normal conv/linear weights, neutral batchnorm, zero biases."""
    rng = np.random.default_rng(seed)
    store: dict[str, np.ndarray] = {}
    for name, shape, kind in spec.param_entries():
        if name.endswith("conv.weight"):
            fan_in = int(np.prod(shape[1:]))
            arr = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
        elif name.endswith(("classifier.weight", "reduce.weight", "expand.weight")):
            fan_in = shape[0]
            arr = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
        elif name.endswith(("bn.scale", "bn.running_var")):
            arr = np.ones(shape)
        else:  # biases, bn shift, running mean
            arr = np.zeros(shape)
        store[name] = arr.astype(dtype)
    return store


# ---------------------------------------------------------------------------
# runtime layers

class _BatchNorm:
    def __init__(self, scale: ad.Tensor, shift: ad.Tensor, running_mean, running_var):
        self.scale = scale
        self.shift = shift
        self.running_mean = running_mean
        self.running_var = running_var
        self.frozen = False

    def __call__(self, x: ad.Tensor, training: bool) -> ad.Tensor:
        use_batch_stats = training and not self.frozen
        return ad.batchnorm(
            x, self.scale, self.shift, self.running_mean, self.running_var, use_batch_stats
        )


class _ConvBn:
    def __init__(self, params: dict, prefix: str, stride: int, padding: int, groups: int, act: bool):
        self.weight = params[f"{prefix}.conv.weight"]
        self.bn = _BatchNorm(
            params[f"{prefix}.bn.scale"],
            params[f"{prefix}.bn.shift"],
            params[f"{prefix}.bn.running_mean"],
            params[f"{prefix}.bn.running_var"],
        )
        self.stride = stride
        self.padding = padding
        self.groups = groups
        self.act = act

    def __call__(self, x: ad.Tensor, training: bool) -> ad.Tensor:
        y = ad.conv2d(x, self.weight, None, self.stride, self.padding, self.groups)
        y = self.bn(y, training)
        return ad.relu6(y) if self.act else y


def _join(prefix: str, suffix: str) -> str:
    return f"{prefix}.{suffix}" if prefix else suffix


class _InvertedResidual:
    def __init__(self, params: dict, prefix: str, cfg: InvertedResidualConfig):
        self.cfg = cfg
        self.expand = None
        if cfg.expansion_factor != 1:
            self.expand = _ConvBn(params, _join(prefix, "expand"), 1, 0, 1, act=True)
        self.depthwise = _ConvBn(
            params, _join(prefix, "depthwise"), cfg.stride, 1, cfg.expanded_channels, act=True
        )
        self.project = _ConvBn(params, _join(prefix, "project"), 1, 0, 1, act=False)

    def __call__(self, x: ad.Tensor, training: bool) -> ad.Tensor:
        y = x
        if self.expand is not None:
            y = self.expand(y, training)
        y = self.depthwise(y, training)
        y = self.project(y, training)
        if self.cfg.has_shortcut:
            y = ad.add(y, x)
        return y


class _Cbam:
    def __init__(self, params: dict, spatial_kernel: int):
        self._graph = attention.cbam_graph
        self.w0 = params["cbam.channel.reduce.weight"]
        self.w1 = params["cbam.channel.expand.weight"]
        self.conv_w = params["cbam.spatial.conv.weight"]
        self.conv_b = params["cbam.spatial.conv.bias"]
        self.padding = (spatial_kernel - 1) // 2

    def __call__(self, x: ad.Tensor, training: bool) -> ad.Tensor:
        return self._graph(x, self.w0, self.w1, self.conv_w, self.conv_b, self.padding)


class Network:
    """A spec bound to a weight store, ready to run forward passes.

    Parameter tensors wrap the store's arrays in place: optimizer updates
    through :meth:`parameters` are visible in the store immediately.
    """

    BACKBONE_PREFIXES = ("stem.", "block", "head.")

    def __init__(self, spec: NetworkSpec, store: Mapping[str, np.ndarray]):
        validate_store(spec, store)
        self.spec = spec
        self.store = store
        self._params: dict[str, ad.Tensor] = {}
        self._buffers: dict[str, np.ndarray] = {}
        bound: dict[str, object] = {}
        for name, _, kind in spec.param_entries():
            if kind == "param":
                t = ad.Tensor(store[name], name=name)
                self._params[name] = t
                bound[name] = t
            else:
                self._buffers[name] = store[name]
                bound[name] = store[name]

        self.stem = _ConvBn(bound, "stem", stride=2, padding=1, groups=1, act=True)
        self.cbam = _Cbam(bound, spec.spatial_kernel)
        self.blocks = [
            _InvertedResidual(bound, spec.block_name(i), cfg) for i, cfg in enumerate(spec.blocks)
        ]
        self.head = _ConvBn(bound, "head", stride=1, padding=0, groups=1, act=True)
        self.classifier_w = bound["classifier.weight"]
        self.classifier_b = bound["classifier.bias"]
        self._bn_layers = [self.stem.bn, self.head.bn]
        for b in self.blocks:
            if b.expand is not None:
                self._bn_layers.append(b.expand.bn)
            self._bn_layers.append(b.depthwise.bn)
            self._bn_layers.append(b.project.bn)

    def parameters(self) -> dict[str, ad.Tensor]:
        return dict(self._params)

    def trainable_parameters(self) -> dict[str, ad.Tensor]:
        return {n: t for n, t in self._params.items() if t.requires_grad}

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.zero_grad()

    def _is_backbone(self, name: str) -> bool:
        return name.startswith(self.BACKBONE_PREFIXES)

    def set_trainable(self, *, backbone: bool, heads: bool) -> None:
        """Mark parameters trainable. Heads = classifier and the CBAM gates;
        frozen batchnorm layers also stop updating their running statistics."""
        for name, t in self._params.items():
            t.requires_grad = backbone if self._is_backbone(name) else heads
        for bn in self._bn_layers:
            bn.frozen = not backbone

    def freeze_backbone(self) -> None:
        self.set_trainable(backbone=False, heads=True)

    def unfreeze_all(self) -> None:
        self.set_trainable(backbone=True, heads=True)

    def forward(self, x: np.ndarray, training: bool = False) -> ad.Tensor:
        """Run the network on an (N, 3, H, W) batch; returns logits (N, K)."""
        if x.ndim != 4 or x.shape[1] != 3:
            raise ShapeError(f"network input must be (N, 3, H, W), got {x.shape}")
        y = ad.Tensor(x)
        y = self.stem(y, training)
        y = self.cbam(y, training)
        for block in self.blocks:
            y = block(y, training)
        y = self.head(y, training)
        y = ad.global_avg_pool(y)
        y = ad.flatten(y)
        return ad.linear(y, self.classifier_w, self.classifier_b)


def inverted_residual_forward(
    x: np.ndarray,
    config: InvertedResidualConfig,
    weights: Mapping[str, np.ndarray],
    training: bool = False,
) -> np.ndarray:
    """Run one inverted-residual block from a flat name->array mapping.

    Expected keys mirror the in-network layout without the block prefix,
    e.g. ``depthwise.conv.weight`` or ``project.bn.scale``; ``expand.*``
    entries are required only when the expansion factor is not 1.
    """
    tc = config.expanded_channels
    expected = []
    if config.expansion_factor != 1:
        expected += list(_conv_bn_entries("expand", (tc, config.in_channels, 1, 1)))
    expected += list(_conv_bn_entries("depthwise", (tc, 1, 3, 3)))
    expected += list(_conv_bn_entries("project", (config.out_channels, tc, 1, 1)))
    bound: dict[str, object] = {}
    for name, shape, kind in expected:
        if name not in weights:
            raise ShapeError(f"block weights missing {name!r}")
        arr = weights[name]
        if tuple(arr.shape) != shape:
            raise ShapeError(f"block weight {name!r} has shape {arr.shape}, expected {shape}")
        bound[name] = ad.Tensor(arr) if kind == "param" else arr
    block = _InvertedResidual(bound, "", config)
    return block(ad.Tensor(x), training).data
