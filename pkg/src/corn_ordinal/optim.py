"""Adam and AdamW updates on plain numpy parameter arrays.

Both functions update ``params`` in place and advance ``state``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizerState:
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.0
    decay_mask: list[bool] | None = None
    step: int = 0
    exp_avg: list[np.ndarray] = field(default_factory=list)
    exp_avg_sq: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        if self.weight_decay < 0:
            raise ValueError(f"weight decay must be non-negative, got {self.weight_decay}")

    def _ensure(self, params) -> None:
        if not self.exp_avg:
            self.exp_avg = [np.zeros_like(p) for p in params]
            self.exp_avg_sq = [np.zeros_like(p) for p in params]
        elif len(self.exp_avg) != len(params):
            raise ValueError("parameter list changed between steps")
        if self.decay_mask is None:
            self.decay_mask = [True] * len(params)


def _adaptive_update(params, grads, state: OptimizerState) -> None:
    b1, b2 = state.betas
    state.step += 1
    bc1 = 1 - b1 ** state.step
    bc2 = 1 - b2 ** state.step
    for p, g, m, v in zip(params, grads, state.exp_avg, state.exp_avg_sq):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        denom = np.sqrt(v / bc2) + state.eps
        p -= (state.lr / bc1) * m / denom


def adam_step(params, grads, state: OptimizerState) -> None:
    """Bias-corrected adaptive-moment step.

    A nonzero ``weight_decay`` here is the classic L2 penalty: ``wd * param``
    is added to the gradient before the moments see it.
    """
    state._ensure(params)
    if state.weight_decay:
        grads = [g + state.weight_decay * p if d else g for p, g, d in zip(params, grads, state.decay_mask)]
    _adaptive_update(params, grads, state)


def adamw_step(params, grads, state: OptimizerState) -> None:
    """Adam with decoupled weight decay: ``param -= lr * wd * param`` first."""
    state._ensure(params)
    if state.weight_decay:
        for p, d in zip(params, state.decay_mask):
            if d:
                p *= 1 - state.lr * state.weight_decay
    _adaptive_update(params, grads, state)
