"""Cross-entropy method for approximate greedy action selection.

Samples pre-squash Gaussians, squashes through tanh into the action box,
refits the Gaussian on the elite pre-squash samples, and on the final
iteration returns the squashed sample with the best utility.
"""

from dataclasses import dataclass

import numpy as np

_STD_FLOOR = 1e-6  # keeps the refit Gaussian proper when elites collapse


@dataclass(frozen=True)
class CEMConfig:
    n_iterations: int = 2
    samples_per_iteration: int = 64
    elite_count: int = 6
    init_mean: float = 0.0
    init_std: float = 1.0

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("need at least one CEM iteration")
        if not 1 <= self.elite_count <= self.samples_per_iteration:
            raise ValueError("elite_count must lie in [1, samples_per_iteration]")


def cem_select_batch(utility, batch, action_dim, cem: CEMConfig, rng):
    """Vectorised CEM over ``batch`` independent maximisation problems.

    ``utility`` maps squashed candidates (batch, samples, action_dim) to
    values (batch, samples).  Returns (batch, action_dim) squashed actions.
    """
    mu = np.full((batch, action_dim), float(cem.init_mean))
    sigma = np.full((batch, action_dim), float(cem.init_std))
    k = cem.elite_count
    for it in range(cem.n_iterations):
        z = rng.standard_normal((batch, cem.samples_per_iteration, action_dim))
        pre = mu[:, None, :] + sigma[:, None, :] * z
        cand = np.tanh(pre)
        q = np.asarray(utility(cand), dtype=np.float64)
        if it < cem.n_iterations - 1:
            elite_idx = np.argpartition(-q, k - 1, axis=1)[:, :k]
            rows = np.arange(batch)[:, None]
            elites = pre[rows, elite_idx]
            mu = elites.mean(axis=1)
            sigma = np.maximum(elites.std(axis=1), _STD_FLOOR)
        else:
            best = np.argmax(q, axis=1)
            return cand[np.arange(batch), best]
    raise AssertionError("unreachable")


def cem_select(utility, action_dim, cem: CEMConfig, rng):
    """Single-problem CEM; ``utility`` maps (samples, action_dim) -> (samples,)."""
    if action_dim < 1:
        raise ValueError("action_dim must be >= 1")
    out = cem_select_batch(lambda v: np.asarray(utility(v[0]))[None, :],
                           1, action_dim, cem, rng)
    return out[0]
