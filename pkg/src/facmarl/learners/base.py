"""Shared learner machinery: configuration, network bundles, input layouts.

Agent-major row convention: stacks shaped (n_agents, batch, dim) flatten to
(n_agents * batch, dim) with agent a occupying rows [a*B, (a+1)*B); utility
outputs reshape back to (n_agents, batch) and transpose to (batch, n_agents)
for the mixers.
"""

from dataclasses import dataclass, field

import numpy as np

from ..agents import Actor, ExplorationSpec
from ..critics import MixerSpec
from ..diffcore import (AdamState, Graph, MLPSpec, ParamSet, adam_init,
                        adam_step, build_network, clip_grads, hard_update,
                        mlp_apply, mlp_infer, soft_update)
from .cem import CEMConfig

ALGORITHMS = ("facmac", "maddpg", "iddpg", "covdn", "comix")
ESTIMATORS = ("centralised", "per_agent")


@dataclass
class LearnerConfig:
    algorithm: str = "facmac"
    mixer: MixerSpec = field(default_factory=MixerSpec)
    gradient_estimator: str = "centralised"
    gamma: float = 0.85
    actor_lr: float = 0.01
    critic_lr: float = 0.01
    tau: float = 0.001
    target_period: int = 0          # > 0: periodic hard sync instead of soft
    batch_size: int = 1024
    buffer_capacity: int = 1_000_000
    train_start: int = 0            # extra transitions required before updates
    grad_clip: float = 10.0
    share_actor: bool = True
    hidden: tuple = (64, 64)
    gumbel_temperature: float = 1.0
    cem: CEMConfig = field(default_factory=CEMConfig)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.gradient_estimator not in ESTIMATORS:
            raise ValueError(f"gradient_estimator must be one of {ESTIMATORS}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.algorithm == "facmac":
            if self.mixer is None or self.mixer.kind == "monolithic":
                raise ValueError("facmac factors its critic; pick a non-monolithic mixer")
        elif self.algorithm == "maddpg":
            self.mixer = MixerSpec("monolithic")
        elif self.algorithm == "iddpg":
            self.mixer = None          # no state input, no mixer
        elif self.algorithm == "covdn":
            self.mixer = MixerSpec("vdn")
        elif self.algorithm == "comix":
            if self.mixer is None or self.mixer.kind not in ("vdn", "monotonic"):
                self.mixer = MixerSpec("monotonic")


@dataclass(frozen=True)
class EnvInfo:
    n_agents: int
    obs_dim: int
    state_dim: int
    action_dim: int          # continuous dims, or n_actions when discrete
    discrete: bool
    episode_limit: int


def from_env(env) -> EnvInfo:
    return EnvInfo(env.n_agents, env.obs_dim, env.state_dim,
                   env.n_actions if env.discrete else env.action_dim,
                   env.discrete, env.episode_limit)


def agent_major(x):
    """(B, n, d) -> (n*B, d)."""
    b, n, d = x.shape
    return np.ascontiguousarray(np.swapaxes(x, 0, 1).reshape(n * b, d))


def actor_input_rows(obs, last_actions):
    """Observation + last own action + agent one-hot, agent-major rows."""
    b, n, _ = obs.shape
    ids = np.broadcast_to(np.eye(n), (b, n, n))
    return agent_major(np.concatenate([obs, last_actions, ids], axis=2))


def actor_input_dim(info: EnvInfo):
    return info.obs_dim + info.action_dim + info.n_agents


class ActorBundle:
    """One shared actor (agent-id input) or one actor per agent."""

    def __init__(self, info: EnvInfo, cfg: LearnerConfig, rng, discrete):
        out_act = "identity" if discrete else "tanh"
        self.net = MLPSpec((actor_input_dim(info), *cfg.hidden, info.action_dim),
                           "relu", out_act)
        mode = "discrete" if discrete else "continuous"
        count = 1 if cfg.share_actor else info.n_agents
        self.actors = [Actor(build_network(self.net, rng), self.net, mode)
                       for _ in range(count)]
        self.shared = cfg.share_actor
        self.n_agents = info.n_agents

    def param_sets(self):
        return [a.params for a in self.actors]

    def apply(self, graph: Graph, input_rows, trainable=True, target=False):
        """input_rows: (n*B, in) agent-major ndarray -> (n*B, out) node."""
        if self.shared:
            node = graph.constant(input_rows)
            return mlp_apply(graph, self.actors[0].params, self.net, node,
                             target=target, trainable=trainable)
        b = input_rows.shape[0] // self.n_agents
        outs = []
        for a, actor in enumerate(self.actors):
            node = graph.constant(input_rows[a * b:(a + 1) * b])
            outs.append(mlp_apply(graph, actor.params, self.net, node,
                                  target=target, trainable=trainable))
        return graph.concat(outs, axis=0)

    def apply_per_agent(self, graph: Graph, input_rows, trainable=True,
                        target=False):
        """Like ``apply`` but returns one (B, out) node per agent."""
        b = input_rows.shape[0] // self.n_agents
        outs = []
        for a in range(self.n_agents):
            actor = self.actors[0] if self.shared else self.actors[a]
            node = graph.constant(input_rows[a * b:(a + 1) * b])
            outs.append(mlp_apply(graph, actor.params, self.net, node,
                                  target=target, trainable=trainable))
        return outs

    def infer(self, input_rows, target=False):
        if self.shared:
            return mlp_infer(self.actors[0].params, self.net, input_rows,
                             target=target)
        b = input_rows.shape[0] // self.n_agents
        return np.concatenate(
            [mlp_infer(a.params, self.net, input_rows[i * b:(i + 1) * b],
                       target=target) for i, a in enumerate(self.actors)], axis=0)


def adam_for(param_sets, lr):
    return [adam_init(ps, lr) for ps in param_sets]


def step_group(param_sets, grad_dicts, states, max_norm):
    """Clip the global norm across the whole group, then Adam-step each set."""
    sq = 0.0
    for grads in grad_dicts:
        for g in grads.values():
            sq += float(np.dot(g.ravel(), g.ravel()))
    norm = float(np.sqrt(sq))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for grads in grad_dicts:
            for k in grads:
                grads[k] = grads[k] * scale
    for ps, grads, st in zip(param_sets, grad_dicts, states):
        adam_step(ps, grads, st)
    return norm


class TargetSync:
    """Soft sync every call, or hard sync every ``period`` calls."""

    def __init__(self, cfg: LearnerConfig):
        self.tau = cfg.tau
        self.period = cfg.target_period
        self.calls = 0

    def __call__(self, param_sets):
        self.calls += 1
        if self.period > 0:
            if self.calls % self.period == 0:
                for ps in param_sets:
                    hard_update(ps)
        else:
            for ps in param_sets:
                soft_update(ps, self.tau)
