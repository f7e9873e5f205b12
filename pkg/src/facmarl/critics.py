"""Critic heads: per-agent utility networks, value mixers (additive,
state-biased, monotonic, nonmonotonic), monolithic joint critics, and
TD-target construction.

The monotonic mixer follows the QMIX lineage: a two-layer mixing network over
the agent utilities whose weights come from state-conditioned hypernetworks,
made non-negative with an absolute-value transform.  The nonmonotonic variant
is the identical architecture with that transform removed.
"""

from dataclasses import dataclass

import numpy as np

from .diffcore import (Graph, MLPSpec, ParamSet, build_into, build_network,
                       mlp_apply, mlp_infer)
from .diffcore.backend import kernels

MIXER_KINDS = ("vdn", "vdn_s", "monotonic", "nonmonotonic", "monolithic")


@dataclass(frozen=True)
class MixerSpec:
    kind: str = "monotonic"
    embed_dim: int = 32
    hypernet_hidden: int = 64

    def __post_init__(self):
        if self.kind not in MIXER_KINDS:
            raise ValueError(f"mixer kind must be one of {MIXER_KINDS}")
        if self.embed_dim <= 0 or self.hypernet_hidden <= 0:
            raise ValueError("mixer dimensions must be positive")


@dataclass
class UtilityNet:
    """Shared per-agent utility Q_a(obs_a (+id, last action), u_a)."""
    params: ParamSet
    net: MLPSpec
    n_agents: int


def build_utility_net(obs_dim, action_dim, n_agents, rng, hidden=(64, 64)) -> UtilityNet:
    spec = MLPSpec((obs_dim + action_dim, *hidden, 1), "relu", "identity")
    return UtilityNet(build_network(spec, rng), spec, n_agents)


def utilities_apply(graph: Graph, nets: UtilityNet, inputs_node,
                    target=False, trainable=True):
    """(n_agents*B, in) agent-major rows -> (B, n_agents) utility matrix."""
    q = mlp_apply(graph, nets.params, nets.net, inputs_node,
                  target=target, trainable=trainable)
    per_agent = graph.reshape(q, (nets.n_agents, -1))
    return graph.transpose(per_agent)


def utilities_forward(nets: UtilityNet, observations, actions):
    """Spec-level convenience: per-agent Q values plus the recording graph.

    observations/actions: (n_agents, B, dim) stacks; returns ((B, n) node,
    graph, action input node) so callers can differentiate w.r.t. actions.
    """
    observations = np.asarray(observations, dtype=np.float64)
    actions = np.asarray(actions, dtype=np.float64)
    if observations.shape[0] != nets.n_agents or actions.shape[0] != nets.n_agents:
        raise ValueError("need one observation and action stack per agent")
    graph = Graph()
    obs_node = graph.constant(observations.reshape(-1, observations.shape[-1]))
    act_node = graph.input(actions.reshape(-1, actions.shape[-1]))
    q = utilities_apply(graph, nets, graph.concat([obs_node, act_node]))
    return q, graph, act_node


@dataclass
class Mixer:
    spec: MixerSpec
    n_agents: int
    state_dim: int
    params: ParamSet = None

    def has_params(self):
        return self.params is not None and len(self.params.entries) > 0


_HYPER_PARTS = ("hw1.", "hb1.", "hw2.", "hb2.")


def build_mixer(spec: MixerSpec, n_agents, state_dim, rng) -> Mixer:
    if spec.kind == "monolithic":
        raise ValueError("the monolithic head is a critic, not a mixer")
    params = ParamSet()
    if spec.kind == "vdn_s":
        build_into(params, MLPSpec((state_dim, spec.hypernet_hidden, 1),
                                   "relu", "identity"), rng, "bias.")
    elif spec.kind in ("monotonic", "nonmonotonic"):
        h = spec.hypernet_hidden
        e = spec.embed_dim
        outs = {"hw1.": n_agents * e, "hb1.": e, "hw2.": e, "hb2.": 1}
        for prefix in _HYPER_PARTS:
            build_into(params, MLPSpec((state_dim, h, outs[prefix]),
                                       "relu", "identity"), rng, prefix)
    return Mixer(spec, n_agents, state_dim, params)


def _hyper_spec(mixer: Mixer, prefix):
    outs = {"hw1.": mixer.n_agents * mixer.spec.embed_dim,
            "hb1.": mixer.spec.embed_dim,
            "hw2.": mixer.spec.embed_dim,
            "hb2.": 1}
    return MLPSpec((mixer.state_dim, mixer.spec.hypernet_hidden, outs[prefix]),
                   "relu", "identity")


def mixer_apply(graph: Graph, mixer: Mixer, q_node, state_node,
                target=False, trainable=True):
    """Q_tot node from a (B, n) utility node and a (B, state_dim) state node."""
    kind = mixer.spec.kind
    if kind == "vdn":
        return graph.sum_axis(q_node, axis=1)
    if kind == "vdn_s":
        bias = mlp_apply(graph, mixer.params, _hyper_spec_bias(mixer), state_node,
                         target=target, trainable=trainable, prefix="bias.")
        return graph.add(graph.sum_axis(q_node, axis=1), bias)
    if kind in ("monotonic", "nonmonotonic"):
        e = mixer.spec.embed_dim
        n = mixer.n_agents
        heads = {}
        for prefix in _HYPER_PARTS:
            out = mlp_apply(graph, mixer.params, _hyper_spec(mixer, prefix),
                            state_node, target=target, trainable=trainable,
                            prefix=prefix)
            if kind == "monotonic" and prefix in ("hw1.", "hw2."):
                out = graph.absolute(out)
            heads[prefix] = out
        w1 = graph.reshape(heads["hw1."], (-1, n, e))
        hidden = graph.elu(graph.add(graph.mix(q_node, w1), heads["hb1."]))
        w2 = graph.reshape(heads["hw2."], (-1, e, 1))
        return graph.add(graph.mix(hidden, w2), heads["hb2."])
    raise ValueError(f"cannot apply mixer kind {kind!r}")


def _hyper_spec_bias(mixer: Mixer):
    return MLPSpec((mixer.state_dim, mixer.spec.hypernet_hidden, 1),
                   "relu", "identity")


def mixer_infer(mixer: Mixer, q_values, states, target=False):
    """Tape-free Q_tot (bootstrap targets, rollout-time greedy checks)."""
    q_values = np.atleast_2d(np.asarray(q_values, dtype=np.float64))
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    kind = mixer.spec.kind
    if kind == "vdn":
        return q_values.sum(axis=1, keepdims=True)
    if kind == "vdn_s":
        bias = mlp_infer(mixer.params, _hyper_spec_bias(mixer), states,
                         target=target, prefix="bias.")
        return q_values.sum(axis=1, keepdims=True) + bias
    if kind in ("monotonic", "nonmonotonic"):
        e = mixer.spec.embed_dim
        n = mixer.n_agents
        head = {p: mlp_infer(mixer.params, _hyper_spec(mixer, p), states,
                             target=target, prefix=p) for p in _HYPER_PARTS}
        w1, w2 = head["hw1."], head["hw2."]
        if kind == "monotonic":
            w1, w2 = np.abs(w1), np.abs(w2)
        hidden = kernels.mix_forward(q_values, np.ascontiguousarray(
            w1.reshape(-1, n, e))) + head["hb1."]
        np.copyto(hidden, np.where(hidden < 0.0, np.expm1(hidden), hidden))
        out = kernels.mix_forward(hidden, np.ascontiguousarray(
            w2.reshape(-1, e, 1))) + head["hb2."]
        return out
    raise ValueError(f"cannot apply mixer kind {kind!r}")


# ---- spec-level helpers over plain arrays ----

def mix_vdn(utilities):
    utilities = np.asarray(utilities, dtype=np.float64)
    if utilities.size == 0:
        raise ValueError("mix_vdn needs at least one utility")
    return utilities.sum(axis=-1)


def mix_vdn_s(utilities, state, mixer: Mixer):
    if state is None:
        raise ValueError("mix_vdn_s needs a state vector")
    return mixer_infer(mixer, utilities, state)


def mix_monotonic(utilities, state, mixer: Mixer):
    if mixer.spec.kind != "monotonic":
        raise ValueError("mixer is not monotonic")
    return mixer_infer(mixer, utilities, state)


def mix_nonmonotonic(utilities, state, mixer: Mixer):
    if mixer.spec.kind != "nonmonotonic":
        raise ValueError("mixer is not nonmonotonic")
    return mixer_infer(mixer, utilities, state)


# ---- monolithic critic ----

@dataclass
class MonolithicCritic:
    """Joint critic Q(s, u_1..u_n) -> scalar."""
    params: ParamSet
    net: MLPSpec


def build_monolithic_critic(state_dim, joint_action_dim, rng,
                            hidden=(64, 64)) -> MonolithicCritic:
    spec = MLPSpec((state_dim + joint_action_dim, *hidden, 1), "relu", "identity")
    return MonolithicCritic(build_network(spec, rng), spec)


def monolithic_forward(critic: MonolithicCritic, state, joint_action):
    """Scalar Q with a graph exposing gradients w.r.t. the joint action."""
    state = np.atleast_2d(np.asarray(state, dtype=np.float64))
    joint_action = np.atleast_2d(np.asarray(joint_action, dtype=np.float64))
    graph = Graph()
    s = graph.constant(state)
    u = graph.input(joint_action)
    q = mlp_apply(graph, critic.params, critic.net, graph.concat([s, u]))
    return q, graph, u


def td_target(reward, terminal, bootstrap_q, gamma):
    """y = r + gamma * (1 - terminal) * Q_bootstrap (vectorised)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    reward = np.asarray(reward, dtype=np.float64)
    cont = 1.0 - np.asarray(terminal, dtype=np.float64)
    return reward + gamma * cont * np.asarray(bootstrap_q, dtype=np.float64)
