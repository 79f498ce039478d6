from .adam import Adam, AdamState, adam_step
from .ops import (
    NonFiniteError,
    ShapeError,
    check_finite,
    conv2d_backward,
    conv2d_forward,
    cross_entropy,
    dense_backward,
    dense_forward,
    maxpool2d,
    maxpool2d_backward,
    relu,
    relu_backward,
    softmax,
    softmax_crossentropy_backward,
)
from .rng import Rng, derive_seed, splitmix64

__all__ = [
    "Adam", "AdamState", "adam_step", "NonFiniteError", "ShapeError", "check_finite",
    "conv2d_backward", "conv2d_forward", "cross_entropy", "dense_backward", "dense_forward",
    "maxpool2d", "maxpool2d_backward", "relu", "relu_backward", "softmax",
    "softmax_crossentropy_backward", "Rng", "derive_seed", "splitmix64",
]
