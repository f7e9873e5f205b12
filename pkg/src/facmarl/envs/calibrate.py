"""View-radius calibration: Monte-Carlo over random rollouts.

Finds the radius at which predators can see each other on a target fraction
of steps under uniformly random play, which is how the partial-observability
level of the predator-prey task is pinned down.
"""

import numpy as np

from .base import EnvSpec
from .predator_prey import pp_reset, pp_step


def pairwise_visibility_distances(spec: EnvSpec, rng, n_episodes=200):
    """Collect predator-predator toroidal distances over random rollouts."""
    from .toroidal import toroidal_distance

    dists = []
    for _ in range(n_episodes):
        state, _, _ = pp_reset(spec, rng)
        for _ in range(spec.episode_limit):
            actions = rng.uniform(-1.0, 1.0, size=(spec.n_agents, 2))
            pp_step(state, actions, rng, episode_limit=spec.episode_limit)
            idx = state.predators()
            pos = state.positions[idx]
            for a in range(len(idx)):
                for b in range(a + 1, len(idx)):
                    dists.append(float(toroidal_distance(pos[a], pos[b],
                                                         spec.world_size)))
    return np.asarray(dists)


def calibrate_view_radius(spec: EnvSpec = None, target_fraction=0.6, seed=0,
                          n_episodes=200):
    """Radius so P(pairwise distance <= radius) ~= target_fraction."""
    if spec is None:
        spec = EnvSpec(kind="predator_prey", n_agents=3)
    rng = np.random.default_rng(seed)
    dists = pairwise_visibility_distances(spec, rng, n_episodes)
    return float(np.quantile(dists, target_fraction))
