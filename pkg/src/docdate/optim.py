"""Adam optimizer over named parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import ShapeError, Tensor


@dataclass
class AdamState:
    """Per-parameter moment estimates; ``step`` increases by one per update."""

    step: int
    m: np.ndarray
    v: np.ndarray


def adam_step(value: np.ndarray, grad: np.ndarray, state: AdamState,
              lr: float, beta1: float, beta2: float, eps: float) -> None:
    """One bias-corrected Adam update, in place on ``value`` and ``state``."""
    if grad.shape != value.shape:
        raise ShapeError(f"gradient shape {grad.shape} does not match parameter {value.shape}")
    state.step += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = state.m / (1.0 - beta1 ** state.step)
    v_hat = state.v / (1.0 - beta2 ** state.step)
    value -= lr * m_hat / (np.sqrt(v_hat) + eps)


@dataclass
class Adam:
    """Adam over a name -> Tensor parameter dict.

    Only the learning rate is typically varied; beta/eps keep the
    conventional defaults.
    """

    params: dict[str, Tensor]
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    states: dict[str, AdamState] = field(default_factory=dict)

    def __post_init__(self):
        for name, p in self.params.items():
            self.states[name] = AdamState(0, np.zeros_like(p.data), np.zeros_like(p.data))

    def step(self, grad_scale: float = 1.0) -> None:
        """Apply one update; missing gradients count as zero."""
        for name, p in self.params.items():
            grad = p.grad if p.grad is not None else np.zeros_like(p.data)
            if grad_scale != 1.0:
                grad = grad * grad_scale
            adam_step(p.data, grad, self.states[name], self.lr, self.beta1, self.beta2, self.eps)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()
