from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ops import NonFiniteError, ShapeError


@dataclass
class AdamState:
    """Per-parameter Adam moments. Defaults are the optimizer's canonical ones."""

    shape: tuple
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)
    dtype: object = np.float64

    def __post_init__(self):
        self.shape = tuple(self.shape)
        if self.m is None:
            self.m = np.zeros(self.shape, dtype=self.dtype)
        if self.v is None:
            self.v = np.zeros(self.shape, dtype=self.dtype)


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState) -> np.ndarray:
    """Apply one bias-corrected Adam update to ``param`` in place and return it."""
    if param.shape != grad.shape or param.shape != state.shape:
        raise ShapeError(f"adam_step: param {param.shape}, grad {grad.shape}, state {state.shape}")
    if np.isnan(grad).any():
        raise NonFiniteError("adam_step: NaN in gradient")
    state.step_count += 1
    t = state.step_count
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** t)
    v_hat = state.v / (1.0 - state.beta2 ** t)
    param -= state.alpha * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return param


class Adam:
    """Adam over a dict of named parameters sharing one learning rate."""

    def __init__(self, params: dict, alpha=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.states = {
            name: AdamState(p.shape, alpha, beta1, beta2, epsilon, dtype=p.dtype)
            for name, p in params.items()
        }

    @property
    def lr(self) -> float:
        return next(iter(self.states.values())).alpha

    @lr.setter
    def lr(self, value: float):
        for st in self.states.values():
            st.alpha = value

    def step(self, params: dict, grads: dict):
        for name, p in params.items():
            adam_step(p, grads[name], self.states[name])
