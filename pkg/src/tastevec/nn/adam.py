"""Bias-corrected Adam optimizer over a flat list of parameter arrays."""

from __future__ import annotations

import numpy as np

from ..errors import TrainingDivergedError


class AdamOptimizer:
    """Holds references to parameter arrays and updates them in place.

    theta -= lr * m_hat / (sqrt(v_hat) + eps), with first/second moment
    estimates bias-corrected by the step counter.
    """

    def __init__(
        self,
        params: list[np.ndarray],
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        self.params = params
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def update(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ValueError(
                f"got {len(grads)} gradients for {len(self.params)} parameters"
            )
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise TrainingDivergedError(
                    f"non-finite gradient at optimizer step {self.step_count + 1}",
                    step=self.step_count + 1,
                )
        self.step_count += 1
        b1c = 1.0 - self.beta1**self.step_count
        b2c = 1.0 - self.beta2**self.step_count
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / b1c) / (np.sqrt(v / b2c) + self.epsilon)


def adam_update(state: AdamOptimizer, grads: list[np.ndarray]) -> list[np.ndarray]:
    """One Adam step; mutates and returns the bound parameter arrays."""
    state.update(grads)
    return state.params
