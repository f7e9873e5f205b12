"""Built-in environments: continuous/discrete matrix games and toroidal
predator-prey (standard and nonmonotonic-reward variants)."""

from .base import KINDS, EnvSpec, StepResult, joint_state
from .calibrate import calibrate_view_radius
from .matrix_game import (NONMONOTONIC_PAYOFF, ContinuousMatrixGame,
                          DiscreteMatrixGame, cmg_reward, discrete_game_step)
from .predator_prey import (DEFAULT_VIEW_RADIUS, PlacementError, PredatorPrey,
                            WorldState, build_obs, pp_reset, pp_step,
                            prey_heuristic)
from .toroidal import toroidal_delta, toroidal_distance, wrap


def make_env(spec: EnvSpec):
    if spec.kind == "continuous_matrix_game":
        return ContinuousMatrixGame(spec)
    if spec.kind in ("predator_prey", "predator_prey_nonmonotonic"):
        return PredatorPrey(spec)
    if spec.kind == "discrete_matrix_game":
        if spec.payoff is None:
            raise ValueError("discrete_matrix_game needs a payoff matrix")
        return DiscreteMatrixGame(spec.payoff)
    raise ValueError(f"unknown env kind {spec.kind!r}")


__all__ = [
    "KINDS", "EnvSpec", "StepResult", "joint_state", "make_env",
    "ContinuousMatrixGame", "DiscreteMatrixGame", "PredatorPrey",
    "WorldState", "cmg_reward", "discrete_game_step", "pp_reset", "pp_step",
    "prey_heuristic", "build_obs", "toroidal_delta", "toroidal_distance",
    "wrap", "calibrate_view_radius", "PlacementError",
    "NONMONOTONIC_PAYOFF", "DEFAULT_VIEW_RADIUS",
]
