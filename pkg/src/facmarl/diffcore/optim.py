"""Adam optimisation and target-network synchronisation."""

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .nn import ParamSet


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def adam_init(params: ParamSet, learning_rate: float, **kw) -> AdamState:
    state = AdamState(learning_rate, **kw)
    for name, v in params.entries.items():
        state.first_moment[name] = np.zeros_like(v)
        state.second_moment[name] = np.zeros_like(v)
    return state


def clip_grads(grads: dict, max_norm: float) -> float:
    """Global-norm clip, in place on the gradient map. Returns the raw norm."""
    sq = 0.0
    for g in grads.values():
        sq += float(np.dot(g.ravel(), g.ravel()))
    norm = np.sqrt(sq)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * scale
    return norm


def adam_step(params: ParamSet, grads: dict, state: AdamState):
    """One bias-corrected Adam update on the online entries, in place."""
    missing = set(params.entries) - set(grads)
    if missing:
        raise ValueError(f"gradients missing for parameters: {sorted(missing)}")
    state.step_count += 1
    t = state.step_count
    for name, p in params.entries.items():
        g = np.ascontiguousarray(grads[name], dtype=np.float64)
        if g.shape != p.shape:
            raise ValueError(
                f"gradient shape {g.shape} != parameter shape {p.shape} for {name!r}")
        kernels.adam_update(p.reshape(-1), g.reshape(-1),
                            state.first_moment[name].reshape(-1),
                            state.second_moment[name].reshape(-1),
                            t, state.learning_rate, state.beta1, state.beta2,
                            state.epsilon)
    params.bump()


def soft_update(params: ParamSet, tau: float):
    """target <- tau * online + (1 - tau) * target, elementwise."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    for name, online in params.entries.items():
        kernels.soft_update(params.target_entries[name].reshape(-1),
                            online.reshape(-1), tau)
    params.bump()


def hard_update(params: ParamSet):
    soft_update(params, 1.0)
