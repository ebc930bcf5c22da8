from .tensor import (
    DimensionError,
    NumericError,
    Tensor,
    add,
    as_tensor,
    broadcast_to,
    concat,
    elementwise,
    elu,
    hadamard,
    layer_norm,
    lstm_layer,
    matmul,
    mean,
    mul,
    reshape,
    scale,
    sigmoid,
    softmax,
    stack,
    sub,
    swapaxes,
    take,
    tanh,
    tsum,
)
from .optim import Adam, AdamState, OptimizerConfig, adam_step
from .init import glorot_uniform

__all__ = [
    "Adam",
    "AdamState",
    "DimensionError",
    "NumericError",
    "OptimizerConfig",
    "Tensor",
    "adam_step",
    "add",
    "as_tensor",
    "broadcast_to",
    "concat",
    "elementwise",
    "elu",
    "glorot_uniform",
    "hadamard",
    "layer_norm",
    "lstm_layer",
    "matmul",
    "mean",
    "mul",
    "reshape",
    "scale",
    "sigmoid",
    "softmax",
    "stack",
    "sub",
    "swapaxes",
    "take",
    "tanh",
    "tsum",
]
