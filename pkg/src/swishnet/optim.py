"""Adam with bias correction and the cosine-annealed warm-restart schedule."""

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError
from .tensor import Tensor

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_init(params: dict[str, Tensor]) -> AdamState:
    state = AdamState()
    for name, p in params.items():
        state.m[name] = np.zeros_like(p.data)
        state.v[name] = np.zeros_like(p.data)
    return state


def adam_step(
    state: AdamState,
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    lr: float,
) -> None:
    """Standard bias-corrected Adam update, in place."""
    state.step += 1
    t = state.step
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if not np.isfinite(g).all():
            raise TrainingError(f"non-finite gradient for parameter {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        m_hat = m / (1.0 - ADAM_BETA1**t)
        v_hat = v / (1.0 - ADAM_BETA2**t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def sgdr_lr(t: float, period: float, base_lr: float, min_lr: float) -> float:
    """Cosine annealing within one restart period:
    lr = min + (base - min)(1 + cos(pi t / T)) / 2, for 0 <= t <= T."""
    return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + np.cos(np.pi * t / period))


def sgdr_schedule(
    n_epochs: int,
    base_lr: float,
    min_lr: float,
    period: int = 10,
    period_mult: int = 2,
) -> np.ndarray:
    """Per-epoch learning rates with warm restarts; at each restart the
    position resets to 0 and the period multiplies."""
    lrs = np.empty(n_epochs)
    t = 0
    current = period
    for epoch in range(n_epochs):
        if t >= current:
            t = 0
            current *= period_mult
        lrs[epoch] = sgdr_lr(t, current, base_lr, min_lr)
        t += 1
    return lrs
