"""numpy-backed tensors, reverse-mode autodiff, neural ops, optimizers."""

from .gradcheck import as_check_params, grad_check
from .ops import (
    bce_with_logits,
    concat,
    cross_entropy,
    dropout,
    embedding_lookup,
    gather_rows,
    gelu,
    layer_norm,
    sigmoid,
    softmax,
)
from .optim import SGD, Adam, AdamW, Optimizer
from .tensor import (
    NotScalarLoss,
    ShapeMismatch,
    Tensor,
    add,
    backward,
    grad_enabled,
    matmul,
    mul,
    no_grad,
    permute,
    reshape,
    sub,
    tmean,
    tsum,
    unbroadcast,
)

__all__ = [
    "Adam",
    "AdamW",
    "NotScalarLoss",
    "Optimizer",
    "SGD",
    "ShapeMismatch",
    "Tensor",
    "add",
    "as_check_params",
    "backward",
    "bce_with_logits",
    "concat",
    "cross_entropy",
    "dropout",
    "embedding_lookup",
    "gather_rows",
    "gelu",
    "grad_check",
    "grad_enabled",
    "layer_norm",
    "matmul",
    "mul",
    "no_grad",
    "permute",
    "reshape",
    "sigmoid",
    "softmax",
    "sub",
    "tmean",
    "tsum",
    "unbroadcast",
]
