from .attention import (
    CbamParams,
    ChannelAttentionParams,
    SpatialAttentionParams,
    cbam_apply,
    channel_attention,
    spatial_attention,
)
from .model import (
    BOTTLENECK_SCHEDULE,
    InvertedResidualConfig,
    Network,
    NetworkSpec,
    build_network,
    init_weights,
    inverted_residual_forward,
    validate_store,
)
from .accounting import LayerCost, conv_macs, count_flops, count_params, flops_breakdown, separable_ratio
from .weights_io import WeightFormatError, load_weights, save_weights, store_digest

__all__ = [
    "BOTTLENECK_SCHEDULE",
    "CbamParams",
    "ChannelAttentionParams",
    "InvertedResidualConfig",
    "LayerCost",
    "Network",
    "NetworkSpec",
    "SpatialAttentionParams",
    "WeightFormatError",
    "build_network",
    "cbam_apply",
    "channel_attention",
    "conv_macs",
    "count_flops",
    "count_params",
    "flops_breakdown",
    "init_weights",
    "inverted_residual_forward",
    "load_weights",
    "save_weights",
    "separable_ratio",
    "spatial_attention",
    "store_digest",
    "validate_store",
]
