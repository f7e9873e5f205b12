"""One-step matrix games: the two-agent continuous coordination game and
discrete payoff-table games.

The continuous game has a narrow reward path along the diagonal towards
(1, 1) and a punishment everywhere else that grows with distance from the
origin.  The path is a cone ``|u1 - u2| < width * (midpoint + apex_offset)``
whose apex sits slightly behind the origin: the origin itself lies just
inside the path (so the joint diagonal direction improves smoothly there),
while moving along either axis alone exits the path almost immediately.
That combination is what separates the two gradient estimators: the
replay-marginalised per-agent gradient at the origin nearly vanishes, while
the centralised gradient points firmly up the diagonal.
"""

import numpy as np

from .base import StepResult, joint_state

PATH_WIDTH = 0.15      # cone opening per unit of diagonal progress
PUNISH_SLOPE = 0.3     # off-path penalty per unit Chebyshev distance from origin
APEX_OFFSET = 0.05     # cone apex sits this far behind the origin (diagonal units)


def cmg_reward(u1, u2, path_width=PATH_WIDTH, punish_slope=PUNISH_SLOPE,
               apex_offset=APEX_OFFSET):
    """Team reward of the continuous matrix game; inputs in [-1, 1].

    On the diagonal the reward is exactly r(t, t) = t with the global maximum
    r(1, 1) = 1; off the path it is a pure punishment growing with distance
    from the origin.  The surface is piecewise smooth (the punishment is a
    Chebyshev norm, the path window is quartic) so a modest network can
    distill it to high fidelity.  Vectorised over broadcastable inputs.
    """
    u1 = np.asarray(u1, dtype=np.float64)
    u2 = np.asarray(u2, dtype=np.float64)
    gain = 1.0 + punish_slope   # keeps the net diagonal slope at exactly 1
    depth = 0.5 * (u1 + u2) + apex_offset
    half_width = path_width * np.maximum(depth, 1e-300)
    q = np.abs(u1 - u2) / half_width
    on_path = (depth > 0.0) & (q < 1.0)
    window = (1.0 - np.where(on_path, q, 0.0) ** 2) ** 2
    bonus = np.where(on_path, gain * depth * window, 0.0)
    r = bonus - gain * apex_offset \
        - punish_slope * np.maximum(np.abs(u1), np.abs(u2))
    return float(r) if r.ndim == 0 else r


class ContinuousMatrixGame:
    """Two agents, one step, scalar actions in [-1, 1]."""

    n_agents = 2
    action_dim = 1
    discrete = False
    episode_limit = 1

    def __init__(self, spec=None):
        self.obs_dim = 2  # agent one-hot, so shared networks can tell them apart
        self.state_dim = self.n_agents * self.obs_dim
        self._obs = np.eye(self.n_agents, dtype=np.float64)

    def reset(self, rng=None):
        obs = self._obs.copy()
        return obs, joint_state(obs)

    def step(self, actions):
        actions = np.asarray(actions, dtype=np.float64).reshape(self.n_agents)
        reward = cmg_reward(actions[0], actions[1])
        obs = self._obs.copy()
        return StepResult(obs, joint_state(obs), float(reward), True)


def discrete_game_step(payoff, joint_action):
    """One-step lookup: reward = payoff[joint_action], trivial observations."""
    payoff = np.asarray(payoff, dtype=np.float64)
    idx = tuple(int(a) for a in joint_action)
    if len(idx) != payoff.ndim:
        raise ValueError(f"need {payoff.ndim} action indices, got {len(idx)}")
    for a, size in zip(idx, payoff.shape):
        if not 0 <= a < size:
            raise ValueError(f"action index {a} out of range for axis size {size}")
    n = payoff.ndim
    obs = np.eye(n, dtype=np.float64)
    return StepResult(obs, joint_state(obs), float(payoff[idx]), True)


class DiscreteMatrixGame:
    """n-agent one-step game over a dense payoff tensor."""

    discrete = True
    episode_limit = 1

    def __init__(self, payoff):
        self.payoff = np.asarray(payoff, dtype=np.float64)
        self.n_agents = self.payoff.ndim
        self.n_actions = self.payoff.shape[0]
        if any(s != self.n_actions for s in self.payoff.shape):
            raise ValueError("payoff tensor must be square in every axis")
        self.obs_dim = self.n_agents
        self.state_dim = self.n_agents * self.obs_dim
        self._obs = np.eye(self.n_agents, dtype=np.float64)

    def reset(self, rng=None):
        obs = self._obs.copy()
        return obs, joint_state(obs)

    def step(self, actions):
        return discrete_game_step(self.payoff, np.asarray(actions).reshape(-1))


# Payoff with its optimum at (0, 0) guarded by severe miscoordination
# penalties; no additive or monotonic factorisation can place its argmax there
# (the brute-force check lives in the test suite).
NONMONOTONIC_PAYOFF = np.array([
    [8.0, -12.0, -12.0],
    [-12.0, 0.0, 0.0],
    [-12.0, 0.0, 0.0],
])
