"""Gradient-field probes on the continuous matrix game.

Distills a smooth joint critic onto the analytic reward surface and exposes
the two gradient quantities whose separation motivates the centralised
estimator: the per-agent gradient marginalised over replayed teammate
actions (which vanishes at the origin) and the centralised gradient at the
current joint action (which points up the diagonal path).
"""

import numpy as np

from .critics import MonolithicCritic, build_monolithic_critic
from .diffcore import Graph, adam_init, adam_step, mlp_apply, mlp_infer
from .envs import ContinuousMatrixGame, cmg_reward
from .envs.matrix_game import APEX_OFFSET, PATH_WIDTH


def cmg_state():
    env = ContinuousMatrixGame()
    _, state = env.reset()
    return state[None, :]


def _training_points(rng):
    """Uniform grid plus dense coverage of the regions the probes stress:
    the near-origin disk, the path interior, and thin bands around both axes
    (the latter pin the cross-axis derivatives the per-agent probe reads)."""
    g = np.linspace(-1.0, 1.0, 101)
    u1, u2 = np.meshgrid(g, g, indexing="ij")
    grid = np.stack([u1.ravel(), u2.ravel()], 1)
    dense = np.linspace(-1.0, 1.0, 801)
    lines = []
    for off in (-0.03, -0.015, -0.005, 0.0, 0.005, 0.015, 0.03):
        lines.append(np.stack([np.full_like(dense, off), dense], 1))
        lines.append(np.stack([dense, np.full_like(dense, off)], 1))
    tt = np.linspace(-0.3, 1.0, 400)
    diag = np.stack([tt, tt], 1)
    mid = rng.uniform(0.0, 1.0, 4000)
    frac = rng.uniform(-1.0, 1.0, 4000)
    half = frac * PATH_WIDTH * (mid / 2 + APEX_OFFSET)
    cone = np.stack([mid + half, mid - half], 1)
    theta = rng.uniform(0.0, 2 * np.pi, 6000)
    rad = np.abs(rng.normal(0.0, 0.1, 6000))
    disk = np.clip(np.stack([rad * np.cos(theta), rad * np.sin(theta)], 1), -1, 1)
    return np.concatenate([grid] + lines + [diag, cone, disk])


def distill_cmg_critic(seed=0, iters=12000, lr=2e-3, hidden=(64, 64)):
    """Regress a joint critic onto the matrix-game surface.

    Returns (critic, state_row); fidelity is judged by ``grid_mse``.
    """
    rng = np.random.default_rng(seed)
    state = cmg_state()
    points = _training_points(rng)
    targets = cmg_reward(points[:, 0], points[:, 1])[:, None]
    critic = build_monolithic_critic(state.shape[1], 2, rng, hidden)
    opt = adam_init(critic.params, lr)
    inputs = np.concatenate(
        [np.broadcast_to(state, (len(points), state.shape[1])), points], 1)
    for it in range(iters):
        if it == int(iters * 0.7):
            opt.learning_rate = lr / 5
        idx = rng.integers(0, len(points), 1024)
        graph = Graph()
        out = mlp_apply(graph, critic.params, critic.net,
                        graph.constant(inputs[idx]))
        err = graph.sub(out, graph.constant(targets[idx]))
        loss = graph.mean(graph.square(err))
        graph.backward(loss)
        adam_step(critic.params, graph.collect_grads(critic.params), opt)
    return critic, state


def grid_mse(critic: MonolithicCritic, state, resolution=101):
    g = np.linspace(-1.0, 1.0, resolution)
    u1, u2 = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([u1.ravel(), u2.ravel()], 1)
    x = np.concatenate([np.broadcast_to(state, (len(pts), state.shape[1])), pts], 1)
    pred = mlp_infer(critic.params, critic.net, x)
    truth = cmg_reward(pts[:, 0], pts[:, 1])[:, None]
    return float(np.mean((pred - truth) ** 2))


def action_gradients(critic: MonolithicCritic, state, joint_actions):
    """dQ/du at each joint action (rows of shape (k, 2))."""
    joint_actions = np.atleast_2d(np.asarray(joint_actions, dtype=np.float64))
    graph = Graph()
    s = graph.constant(np.broadcast_to(state, (len(joint_actions), state.shape[1])))
    u = graph.input(joint_actions)
    q = mlp_apply(graph, critic.params, critic.net, graph.concat([s, u]))
    graph.backward(q, np.ones((len(joint_actions), 1)))
    return u.grad


def centralised_gradient(critic: MonolithicCritic, state, policy_action=(0.0, 0.0)):
    """Joint-action gradient with every agent at its current policy output."""
    return action_gradients(critic, state, np.asarray(policy_action)[None, :])[0]


def per_agent_gradient(critic: MonolithicCritic, state, agent, policy_value=0.0,
                       replay_actions=None):
    """Batch-mean dQ/du_a with u_a pinned to the policy and the other agent's
    actions drawn from the replayed exploration range."""
    if replay_actions is None:
        replay_actions = np.linspace(-1.0, 1.0, 401)
    k = len(replay_actions)
    pts = np.empty((k, 2))
    pts[:, agent] = policy_value
    pts[:, 1 - agent] = replay_actions
    grads = action_gradients(critic, state, pts)
    return float(grads[:, agent].mean())
