"""Factored-critic deterministic policy gradient learner.

Critic: per-agent utilities combined by a mixer, regressed on the bootstrap
target built entirely from target networks.  Policy: either the centralised
estimator (every agent's action re-sampled from its current policy before
differentiating Q_tot over the whole joint action) or the per-agent
estimator (only agent a's action comes from its policy; the rest stay as
replayed), which is the ablation the two estimators are compared on.
"""

from dataclasses import dataclass

import numpy as np

from ..agents import (ExplorationSpec, explore_continuous, gumbel_softmax_node,
                      sample_bounded)
from ..critics import (Mixer, UtilityNet, build_mixer, build_utility_net,
                       mixer_apply, mixer_infer, td_target, utilities_apply)
from ..diffcore import AdamState, Graph, adam_init, mlp_infer
from .base import (ActorBundle, EnvInfo, LearnerConfig, TargetSync, actor_input_rows,
                   actor_input_dim, agent_major, step_group)


@dataclass
class FacmacNets:
    actor: ActorBundle
    utility: UtilityNet
    mixer: Mixer
    actor_opt: list
    critic_opt: AdamState
    mixer_opt: AdamState


def build_facmac(info: EnvInfo, cfg: LearnerConfig, rng) -> FacmacNets:
    actor = ActorBundle(info, cfg, rng, discrete=info.discrete)
    utility = build_utility_net(actor_input_dim(info), info.action_dim,
                                info.n_agents, rng, cfg.hidden)
    mixer = build_mixer(cfg.mixer, info.n_agents, info.state_dim, rng)
    return FacmacNets(
        actor, utility, mixer,
        [adam_init(ps, cfg.actor_lr) for ps in actor.param_sets()],
        adam_init(utility.params, cfg.critic_lr),
        adam_init(mixer.params, cfg.critic_lr) if mixer.has_params() else None,
    )


def _greedy_onehot(logits):
    idx = logits.argmax(axis=-1)
    out = np.zeros_like(logits)
    np.put_along_axis(out, idx[:, None], 1.0, axis=-1)
    return out


def _batch_state(obs):
    return np.ascontiguousarray(obs.reshape(obs.shape[0], -1))


def facmac_critic_update(batch, nets: FacmacNets, cfg: LearnerConfig):
    """One regression step of Q_tot onto the target-network bootstrap."""
    obs, actions = batch["obs"], batch["actions"]
    if obs.shape[0] == 0:
        raise ValueError("empty batch")
    b, n = obs.shape[0], obs.shape[1]

    # bootstrap: target actors choose next actions, target critic + mixer score them
    next_rows = actor_input_rows(batch["next_obs"], actions)
    next_act = nets.actor.infer(next_rows, target=True)
    if nets.actor.actors[0].mode == "discrete":
        next_act = _greedy_onehot(next_act)
    next_in = np.concatenate([next_rows, next_act], axis=1)
    q_next = mlp_infer(nets.utility.params, nets.utility.net, next_in,
                       target=True).reshape(n, b).T
    qtot_next = mixer_infer(nets.mixer, q_next, _batch_state(batch["next_obs"]),
                            target=True)[:, 0]
    y = td_target(batch["reward"], batch["terminal"], qtot_next, cfg.gamma)

    graph = Graph()
    rows = actor_input_rows(obs, batch["last_actions"])
    util_in = graph.constant(np.concatenate([rows, agent_major(actions)], axis=1))
    q = utilities_apply(graph, nets.utility, util_in)
    qtot = mixer_apply(graph, nets.mixer, q, graph.constant(_batch_state(obs)))
    err = graph.sub(qtot, graph.constant(y[:, None]))
    loss = graph.mean(graph.square(err))
    graph.backward(loss)

    sets = [nets.utility.params]
    grads = [graph.collect_grads(nets.utility.params)]
    opts = [nets.critic_opt]
    if nets.mixer.has_params():
        sets.append(nets.mixer.params)
        grads.append(graph.collect_grads(nets.mixer.params))
        opts.append(nets.mixer_opt)
    step_group(sets, grads, opts, cfg.grad_clip)
    return float(loss.value)


def _ascend_actors(graph, objective, nets: FacmacNets, cfg: LearnerConfig):
    """Maximise the objective node w.r.t. actor parameters; returns grad norm."""
    loss = graph.scale(objective, -1.0)
    graph.backward(loss)
    sets = nets.actor.param_sets()
    grads = [graph.collect_grads(ps) for ps in sets]
    return step_group(sets, grads, nets.actor_opt, cfg.grad_clip)


def facmac_policy_update(batch, nets: FacmacNets, cfg: LearnerConfig):
    """Centralised estimator: all actions from current policies."""
    if nets.mixer is None:
        raise ValueError("policy update needs a mixer")
    obs = batch["obs"]
    rows = actor_input_rows(obs, batch["last_actions"])
    graph = Graph()
    actions = nets.actor.apply(graph, rows, trainable=True)
    util_in = graph.concat([graph.constant(rows), actions], axis=1)
    q = utilities_apply(graph, nets.utility, util_in, trainable=False)
    qtot = mixer_apply(graph, nets.mixer, q, graph.constant(_batch_state(obs)),
                       trainable=False)
    return _ascend_actors(graph, graph.mean(qtot), nets, cfg)


def per_agent_policy_update(batch, nets: FacmacNets, cfg: LearnerConfig):
    """Per-agent estimator: for agent a only u_a comes from its policy; all
    other agents' actions stay as sampled from the replay buffer."""
    obs, rep_actions = batch["obs"], batch["actions"]
    b, n = obs.shape[0], obs.shape[1]
    rows = actor_input_rows(obs, batch["last_actions"])

    # replayed utilities (constants: no gradient flows through them)
    rep_in = np.concatenate([rows, agent_major(rep_actions)], axis=1)
    q_rep = mlp_infer(nets.utility.params, nets.utility.net, rep_in).reshape(n, b).T

    graph = Graph()
    actions = nets.actor.apply(graph, rows, trainable=True)
    util_in = graph.concat([graph.constant(rows), actions], axis=1)
    q_pol = utilities_apply(graph, nets.utility, util_in, trainable=False)
    state = graph.constant(_batch_state(obs))
    q_rep_node = graph.constant(q_rep)

    total = None
    for a in range(n):
        keep = np.ones((b, n))
        keep[:, a] = 0.0
        swap = 1.0 - keep
        q_head = graph.add(graph.mul(q_rep_node, graph.constant(keep)),
                           graph.mul(q_pol, graph.constant(swap)))
        qtot_a = mixer_apply(graph, nets.mixer, q_head, state, trainable=False)
        total = qtot_a if total is None else graph.add(total, qtot_a)
    return _ascend_actors(graph, graph.mean(total), nets, cfg)


def discrete_policy_update(batch, nets: FacmacNets, cfg: LearnerConfig, rng):
    """Centralised estimator through Straight-Through Gumbel-Softmax samples."""
    obs = batch["obs"]
    rows = actor_input_rows(obs, batch["last_actions"])
    graph = Graph()
    logits = nets.actor.apply(graph, rows, trainable=True)
    relaxed = gumbel_softmax_node(graph, logits, cfg.gumbel_temperature, rng)
    onehot = graph.straight_through(relaxed)
    util_in = graph.concat([graph.constant(rows), onehot], axis=1)
    q = utilities_apply(graph, nets.utility, util_in, trainable=False)
    qtot = mixer_apply(graph, nets.mixer, q, graph.constant(_batch_state(obs)),
                       trainable=False)
    return _ascend_actors(graph, graph.mean(qtot), nets, cfg)


class FacmacLearner:
    """Rollout-facing wrapper tying the update rules to one target-sync clock."""

    name = "facmac"

    def __init__(self, info: EnvInfo, cfg: LearnerConfig,
                 exploration: ExplorationSpec, rng):
        self.info = info
        self.cfg = cfg
        self.exploration = exploration
        self.nets = build_facmac(info, cfg, rng)
        self.sync = TargetSync(cfg)

    # -- acting --

    def _policy_rows(self, obs, last_action):
        return actor_input_rows(obs[None], last_action[None])

    def act(self, obs, last_action, step, rng, explore=True):
        out = self.nets.actor.infer(self._policy_rows(obs, last_action))
        if self.info.discrete:
            if explore:
                eps = self.exploration.epsilon_at(step)
                return sample_bounded(out, eps, rng)
            return out.argmax(axis=-1)
        if explore:
            return explore_continuous(out, self.exploration, step, rng)
        return out

    # -- training --

    def train_step(self, batch, rng):
        loss = facmac_critic_update(batch, self.nets, self.cfg)
        if self.info.discrete:
            norm = discrete_policy_update(batch, self.nets, self.cfg, rng)
        elif self.cfg.gradient_estimator == "per_agent":
            norm = per_agent_policy_update(batch, self.nets, self.cfg)
        else:
            norm = facmac_policy_update(batch, self.nets, self.cfg)
        self.sync(self.param_sets())
        return {"critic_loss": loss, "actor_grad_norm": norm}

    def param_sets(self):
        sets = list(self.nets.actor.param_sets()) + [self.nets.utility.params]
        if self.nets.mixer.has_params():
            sets.append(self.nets.mixer.params)
        return sets

    def optimizer_states(self):
        opts = {f"actor{i}": st for i, st in enumerate(self.nets.actor_opt)}
        opts["critic"] = self.nets.critic_opt
        if self.nets.mixer_opt is not None:
            opts["mixer"] = self.nets.mixer_opt
        return opts

    def named_param_sets(self):
        named = {f"actor{i}": ps for i, ps in enumerate(self.nets.actor.param_sets())}
        named["utility"] = self.nets.utility.params
        if self.nets.mixer.has_params():
            named["mixer"] = self.nets.mixer.params
        return named
