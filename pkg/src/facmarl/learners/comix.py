"""Continuous Q-learning baselines: additive (COVDN) or monotonic (COMIX)
mixing of per-agent utilities, with cross-entropy-method action selection.

Per-agent CEM maximisation is sound here because maximising each utility
separately maximises the additive/monotonic Q_tot."""

import numpy as np

from ..critics import (build_mixer, build_utility_net, mixer_apply,
                       mixer_infer, td_target, utilities_apply)
from ..diffcore import Graph, adam_init, mlp_infer
from .base import (EnvInfo, LearnerConfig, TargetSync, actor_input_dim,
                   actor_input_rows, agent_major, step_group)
from .cem import cem_select_batch


def _batch_state(obs):
    return np.ascontiguousarray(obs.reshape(obs.shape[0], -1))


class ComixLearner:
    """COMIX / COVDN depending on the configured mixer kind."""

    def __init__(self, info: EnvInfo, cfg: LearnerConfig, exploration, rng):
        if info.discrete:
            raise ValueError("covdn/comix cover continuous actions")
        self.info = info
        self.cfg = cfg
        self.name = cfg.algorithm
        self.utility = build_utility_net(actor_input_dim(info), info.action_dim,
                                         info.n_agents, rng, cfg.hidden)
        self.mixer = build_mixer(cfg.mixer, info.n_agents, info.state_dim, rng)
        self.critic_opt = adam_init(self.utility.params, cfg.critic_lr)
        self.mixer_opt = (adam_init(self.mixer.params, cfg.critic_lr)
                          if self.mixer.has_params() else None)
        self.sync = TargetSync(cfg)

    def _cem_actions(self, cond_rows, rng, target=False):
        """Greedy-by-CEM actions for agent-major conditioning rows."""
        n_problems = cond_rows.shape[0]
        da = self.info.action_dim

        def utility(cand):
            s = cand.shape[1]
            tiled = np.repeat(cond_rows, s, axis=0)
            x = np.concatenate([tiled, cand.reshape(n_problems * s, da)], axis=1)
            q = mlp_infer(self.utility.params, self.utility.net, x, target=target)
            return q.reshape(n_problems, s)

        return cem_select_batch(utility, n_problems, da, self.cfg.cem, rng)

    def act(self, obs, last_action, step, rng, explore=True):
        rows = actor_input_rows(obs[None], last_action[None])
        return self._cem_actions(rows, rng)

    def train_step(self, batch, rng):
        obs, actions = batch["obs"], batch["actions"]
        b, n = obs.shape[0], obs.shape[1]

        next_rows = actor_input_rows(batch["next_obs"], actions)
        next_act = self._cem_actions(next_rows, rng, target=True)
        q_next = mlp_infer(self.utility.params, self.utility.net,
                           np.concatenate([next_rows, next_act], axis=1),
                           target=True).reshape(n, b).T
        qtot_next = mixer_infer(self.mixer, q_next,
                                _batch_state(batch["next_obs"]), target=True)[:, 0]
        y = td_target(batch["reward"], batch["terminal"], qtot_next, self.cfg.gamma)

        graph = Graph()
        rows = actor_input_rows(obs, batch["last_actions"])
        util_in = graph.constant(np.concatenate([rows, agent_major(actions)],
                                                axis=1))
        q = utilities_apply(graph, self.utility, util_in)
        qtot = mixer_apply(graph, self.mixer, q,
                           graph.constant(_batch_state(obs)))
        err = graph.sub(qtot, graph.constant(y[:, None]))
        loss = graph.mean(graph.square(err))
        graph.backward(loss)

        sets = [self.utility.params]
        grads = [graph.collect_grads(self.utility.params)]
        opts = [self.critic_opt]
        if self.mixer.has_params():
            sets.append(self.mixer.params)
            grads.append(graph.collect_grads(self.mixer.params))
            opts.append(self.mixer_opt)
        step_group(sets, grads, opts, self.cfg.grad_clip)
        self.sync(self.param_sets())
        return {"critic_loss": float(loss.value)}

    def param_sets(self):
        sets = [self.utility.params]
        if self.mixer.has_params():
            sets.append(self.mixer.params)
        return sets

    def optimizer_states(self):
        opts = {"critic": self.critic_opt}
        if self.mixer_opt is not None:
            opts["mixer"] = self.mixer_opt
        return opts

    def named_param_sets(self):
        named = {"utility": self.utility.params}
        if self.mixer.has_params():
            named["mixer"] = self.mixer.params
        return named


def comix_train_step(batch, learner: ComixLearner, rng):
    """Spec-level alias for one COMIX/COVDN regression step."""
    return learner.train_step(batch, rng)["critic_loss"]
