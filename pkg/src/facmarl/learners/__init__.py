"""Training update rules and action selection for every algorithm variant."""

from ..agents import ExplorationSpec
from .base import ALGORITHMS, ActorBundle, EnvInfo, LearnerConfig, from_env
from .cem import CEMConfig, cem_select, cem_select_batch
from .comix import ComixLearner, comix_train_step
from .facmac import (FacmacLearner, FacmacNets, build_facmac,
                     discrete_policy_update, facmac_critic_update,
                     facmac_policy_update, per_agent_policy_update)
from .maddpg import IddpgLearner, MaddpgLearner
from .replay import ReplayBuffer, replay_push, replay_sample


def build_learner(info: EnvInfo, cfg: LearnerConfig,
                  exploration: ExplorationSpec, rng):
    if cfg.algorithm == "facmac":
        return FacmacLearner(info, cfg, exploration, rng)
    if cfg.algorithm == "maddpg":
        return MaddpgLearner(info, cfg, exploration, rng)
    if cfg.algorithm == "iddpg":
        return IddpgLearner(info, cfg, exploration, rng)
    if cfg.algorithm in ("covdn", "comix"):
        return ComixLearner(info, cfg, exploration, rng)
    raise ValueError(f"unknown algorithm {cfg.algorithm!r}")


__all__ = [
    "ALGORITHMS", "ActorBundle", "EnvInfo", "LearnerConfig", "from_env",
    "CEMConfig", "cem_select", "cem_select_batch",
    "FacmacLearner", "FacmacNets", "build_facmac", "facmac_critic_update",
    "facmac_policy_update", "per_agent_policy_update", "discrete_policy_update",
    "MaddpgLearner", "IddpgLearner", "ComixLearner", "comix_train_step",
    "ReplayBuffer", "replay_push", "replay_sample", "build_learner",
]
