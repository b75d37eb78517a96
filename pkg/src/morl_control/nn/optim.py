from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[np.ndarray, AdamState]:
    """Bias-corrected Adam update. Inputs are not modified."""
    if not (params.shape == grads.shape == state.m.shape == state.v.shape):
        raise ValueError(
            f"length mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * grads
    v = beta2 * state.v + (1 - beta2) * grads * grads
    m_hat = m / (1 - beta1**t)
    v_hat = v / (1 - beta2**t)
    new = params - lr * m_hat / (np.sqrt(v_hat) + eps)
    return new, AdamState(m, v, t)


def clip_grad_norm(grads: np.ndarray, max_norm: float) -> tuple[np.ndarray, float]:
    """Rescale ``grads`` so their L2 norm is at most ``max_norm``; returns (grads, original norm)."""
    norm = float(np.linalg.norm(grads))
    if max_norm > 0 and norm > max_norm:
        grads = grads * (max_norm / (norm + 1e-6))
    return grads, norm
