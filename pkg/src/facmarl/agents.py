"""Actors and exploration: deterministic tanh policies for continuous
actions, Gumbel-Softmax logits policies for discrete actions."""

from dataclasses import dataclass

import numpy as np

from .diffcore import Graph, MLPSpec, ParamSet, Tape, mlp_apply, mlp_infer


@dataclass
class Actor:
    params: ParamSet
    net: MLPSpec
    mode: str = "continuous"          # continuous | discrete

    def __post_init__(self):
        if self.mode not in ("continuous", "discrete"):
            raise ValueError(f"unknown actor mode {self.mode!r}")
        want = "tanh" if self.mode == "continuous" else "identity"
        if self.net.output_activation != want:
            raise ValueError(f"{self.mode} actor needs {want} output activation")

    @property
    def action_dim(self):
        return self.net.out_dim


@dataclass
class ExplorationSpec:
    gaussian_sigma: float = 0.1
    warmup_uniform_steps: int = 10000   # harness defaults disable this for the
                                        # built-in tasks; kept for DDPG-style runs
    epsilon_start: float = 0.5
    epsilon_end: float = 0.05
    epsilon_anneal_steps: int = 50000

    def __post_init__(self):
        if self.gaussian_sigma < 0:
            raise ValueError("gaussian_sigma must be >= 0")
        for eps in (self.epsilon_start, self.epsilon_end):
            if not 0.0 <= eps <= 1.0:
                raise ValueError("epsilon must lie in [0, 1]")

    def epsilon_at(self, step):
        if self.epsilon_anneal_steps <= 0:
            return self.epsilon_end
        frac = min(1.0, max(0.0, step / self.epsilon_anneal_steps))
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


def act(actor: Actor, observation):
    """Deterministic policy output with a tape for d(action)/d(theta)."""
    observation = np.atleast_2d(np.asarray(observation, dtype=np.float64))
    graph = Graph()
    x = graph.input(observation)
    out = mlp_apply(graph, actor.params, actor.net, x)
    return out.value, Tape(graph, actor.params, x, out)


def act_greedy(actor: Actor, observation, target=False):
    """Tape-free policy output (rollouts and evaluation)."""
    return mlp_infer(actor.params, actor.net, observation, target=target)


def explore_continuous(action, spec: ExplorationSpec, step, rng):
    """Gaussian action noise, clipped to the box; uniform during warmup."""
    action = np.asarray(action, dtype=np.float64)
    if step < spec.warmup_uniform_steps:
        return rng.uniform(-1.0, 1.0, size=action.shape)
    noisy = action + rng.normal(0.0, spec.gaussian_sigma, size=action.shape)
    return np.clip(noisy, -1.0, 1.0)


def gumbel_noise(shape, rng):
    u = rng.uniform(0.0, 1.0, size=shape)
    tiny = np.finfo(np.float64).tiny
    return -np.log(-np.log(np.maximum(u, tiny)))


def gumbel_softmax(logits, temperature, rng, noise=None):
    """Relaxed categorical sample: softmax((logits + g) / temperature)."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    logits = np.asarray(logits, dtype=np.float64)
    if noise is None:
        noise = gumbel_noise(logits.shape, rng)
    z = (logits + noise) / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def gumbel_softmax_node(graph: Graph, logits_node, temperature, rng, noise=None):
    """Graph version: differentiable w.r.t. the logits; noise is a constant."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if noise is None:
        noise = gumbel_noise(logits_node.value.shape, rng)
    shifted = graph.add(logits_node, graph.constant(noise))
    return graph.softmax(graph.scale(shifted, 1.0 / temperature))


def straight_through(x):
    """One-hot of the row argmax (the forward half of the estimator; the
    pass-through gradient lives in Graph.straight_through)."""
    x = np.asarray(x, dtype=np.float64)
    idx = x.argmax(axis=-1)
    out = np.zeros_like(x)
    np.put_along_axis(out, np.expand_dims(idx, -1), 1.0, axis=-1)
    return out


def bounded_softmax(logits, epsilon):
    """(1 - eps) * softmax + eps / |U|: every action keeps probability mass."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    logits = np.asarray(logits, dtype=np.float64)
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=-1, keepdims=True)
    return (1.0 - epsilon) * p + epsilon / logits.shape[-1]


def sample_bounded(logits, epsilon, rng):
    """Sample one action index per row from the bounded softmax."""
    p = bounded_softmax(np.atleast_2d(logits), epsilon)
    cum = np.cumsum(p, axis=-1)
    u = rng.uniform(size=(p.shape[0], 1))
    return (u > cum[:, :-1]).sum(axis=-1).astype(np.int64) if p.shape[-1] > 1 \
        else np.zeros(p.shape[0], dtype=np.int64)
