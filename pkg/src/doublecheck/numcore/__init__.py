"""Float64 tensors, reverse-mode gradients and finite-difference checks."""
from .gradcheck import GradCheckReport, grad_check
from .ops import dropout, embedding, gaussian_filter_1d, gaussian_kernel, lstm
from .tensor import (
    Parameter,
    Tensor,
    add,
    as_tensor,
    backward,
    clamp_min,
    detach,
    div,
    elementwise,
    exp,
    expand_last,
    getitem,
    log,
    matmul,
    mul,
    neg,
    reshape,
    scale,
    sigmoid,
    softmax,
    sub,
    tanh,
    tensor_mean,
    tensor_sum,
    topological_order,
)

__all__ = [
    "GradCheckReport", "Parameter", "Tensor", "add", "as_tensor", "backward", "clamp_min",
    "detach", "div", "dropout", "elementwise", "embedding", "exp", "expand_last",
    "gaussian_filter_1d", "gaussian_kernel", "getitem", "grad_check", "log", "lstm",
    "matmul", "mul", "neg", "reshape", "scale", "sigmoid", "softmax", "sub", "tanh",
    "tensor_mean", "tensor_sum", "topological_order",
]
