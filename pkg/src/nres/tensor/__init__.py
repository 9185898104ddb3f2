"""Dense tensors with reverse-mode automatic differentiation."""

from nres.tensor.core import Tape, Tensor, active_tape, get_dtype, precision
from nres.tensor.gradcheck import max_relative_error, numerical_gradient
from nres.tensor.ops import (
    absolute,
    activation,
    add,
    binary_cross_entropy,
    causal_softmax,
    elementwise,
    embedding,
    log_softmax,
    matmul,
    mean,
    mul,
    reshape,
    rms_norm,
    rowwise_scale,
    scale,
    softmax_cross_entropy,
    sub,
    token_nll,
    total,
    transpose,
)

__all__ = [
    # Core
    "Tensor",
    "Tape",
    "active_tape",
    "get_dtype",
    "precision",
    # Ops
    "absolute",
    "activation",
    "add",
    "binary_cross_entropy",
    "causal_softmax",
    "elementwise",
    "embedding",
    "log_softmax",
    "matmul",
    "mean",
    "mul",
    "reshape",
    "rms_norm",
    "rowwise_scale",
    "scale",
    "softmax_cross_entropy",
    "sub",
    "token_nll",
    "total",
    "transpose",
    # Gradient checks
    "max_relative_error",
    "numerical_gradient",
]
