"""Environment spec and the step contract shared by all built-in tasks."""

import warnings
from dataclasses import dataclass, field

import numpy as np

KINDS = ("continuous_matrix_game", "predator_prey", "predator_prey_nonmonotonic",
         "discrete_matrix_game")


@dataclass
class EnvSpec:
    kind: str = "predator_prey"
    n_agents: int = 3
    n_prey: int = -1              # -1: derive the canonical n_agents / 3
    episode_limit: int = 25
    view_radius: float = float("inf")
    world_size: float = 2.0
    payoff: np.ndarray = None     # discrete matrix game only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown env kind {self.kind!r}; choose from {KINDS}")
        if self.n_agents <= 0:
            raise ValueError("n_agents must be positive")
        if self.episode_limit <= 0:
            raise ValueError("episode_limit must be positive")
        if self.world_size <= 0:
            raise ValueError("world_size must be positive")
        if self.kind.startswith("predator_prey"):
            if self.n_prey < 0:
                self.n_prey = max(1, self.n_agents // 3)
            canonical = self.n_agents in (3, 6, 9) and self.n_prey == self.n_agents // 3
            if not canonical:
                warnings.warn(
                    f"non-canonical predator-prey setup: {self.n_agents} agents / "
                    f"{self.n_prey} preys (canonical runs use 3/1, 6/2, 9/3)",
                    stacklevel=2)
        elif self.n_prey < 0:
            self.n_prey = 0


@dataclass
class StepResult:
    """One transition: the global state is always the concatenated joint
    observation, in fixed agent order."""
    observations: np.ndarray    # (n_agents, obs_dim)
    global_state: np.ndarray    # (n_agents * obs_dim,)
    reward: float
    terminal: bool
    info: dict = field(default_factory=dict)


def joint_state(observations):
    return np.ascontiguousarray(observations, dtype=np.float64).reshape(-1)
