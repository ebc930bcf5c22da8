from .config import DEFAULT_QUANTILES, TftConfig
from .layers import (
    StaticContext,
    causal_mask,
    decode_quantiles,
    embed_and_select,
    encode_static,
    glu,
    grn,
    interpretable_attention,
    temporal_encode,
)
from .model import (
    ForwardTrace,
    QuantileForecast,
    TemporalFusionTransformer,
    forward,
    forward_batch,
    predict_normalized,
)
from .params import ShapeAuditError, clone_params, init_params, param_shapes, shape_audit

__all__ = [
    "DEFAULT_QUANTILES",
    "ForwardTrace",
    "QuantileForecast",
    "ShapeAuditError",
    "StaticContext",
    "TemporalFusionTransformer",
    "TftConfig",
    "causal_mask",
    "clone_params",
    "decode_quantiles",
    "embed_and_select",
    "encode_static",
    "forward",
    "forward_batch",
    "glu",
    "grn",
    "init_params",
    "interpretable_attention",
    "param_shapes",
    "predict_normalized",
    "shape_audit",
    "temporal_encode",
]
