"""Monolithic-critic learners: MADDPG (per-agent policy gradient), the
MADDPG (with CPG) ablation that swaps in the centralised estimator, and
independent DDPG where each agent sees only its own observation."""

import numpy as np

from ..agents import ExplorationSpec, explore_continuous
from ..critics import (build_monolithic_critic, build_utility_net, td_target,
                       utilities_apply)
from ..diffcore import Graph, adam_init, mlp_apply, mlp_infer
from .base import (ActorBundle, EnvInfo, LearnerConfig, TargetSync,
                   actor_input_dim, actor_input_rows, agent_major, step_group)


def _batch_state(obs):
    return np.ascontiguousarray(obs.reshape(obs.shape[0], -1))


class MaddpgLearner:
    """One centralised monolithic critic per agent over (state, joint action)."""

    name = "maddpg"

    def __init__(self, info: EnvInfo, cfg: LearnerConfig,
                 exploration: ExplorationSpec, rng):
        if info.discrete:
            raise ValueError("this MADDPG implementation covers continuous tasks")
        self.info = info
        self.cfg = cfg
        self.exploration = exploration
        self.actor = ActorBundle(info, cfg, rng, discrete=False)
        joint_dim = info.n_agents * info.action_dim
        self.critics = [build_monolithic_critic(info.state_dim, joint_dim, rng,
                                                cfg.hidden)
                        for _ in range(info.n_agents)]
        self.actor_opt = [adam_init(ps, cfg.actor_lr)
                          for ps in self.actor.param_sets()]
        self.critic_opt = [adam_init(c.params, cfg.critic_lr)
                           for c in self.critics]
        self.sync = TargetSync(cfg)

    def act(self, obs, last_action, step, rng, explore=True):
        out = self.actor.infer(actor_input_rows(obs[None], last_action[None]))
        if explore:
            return explore_continuous(out, self.exploration, step, rng)
        return out

    def _critic_update(self, batch):
        obs, actions = batch["obs"], batch["actions"]
        b, n = obs.shape[0], obs.shape[1]
        next_rows = actor_input_rows(batch["next_obs"], actions)
        next_joint = self.actor.infer(next_rows, target=True) \
            .reshape(n, b, -1).transpose(1, 0, 2).reshape(b, -1)
        next_state = _batch_state(batch["next_obs"])
        state = _batch_state(obs)
        joint = actions.reshape(b, -1)
        losses = []
        for critic, opt in zip(self.critics, self.critic_opt):
            q_next = mlp_infer(critic.params, critic.net,
                               np.concatenate([next_state, next_joint], axis=1),
                               target=True)[:, 0]
            y = td_target(batch["reward"], batch["terminal"], q_next,
                          self.cfg.gamma)
            graph = Graph()
            x = graph.constant(np.concatenate([state, joint], axis=1))
            q = mlp_apply(graph, critic.params, critic.net, x)
            err = graph.sub(q, graph.constant(y[:, None]))
            loss = graph.mean(graph.square(err))
            graph.backward(loss)
            step_group([critic.params], [graph.collect_grads(critic.params)],
                       [opt], self.cfg.grad_clip)
            losses.append(float(loss.value))
        return float(np.mean(losses))

    def _policy_update(self, batch):
        obs, rep_actions = batch["obs"], batch["actions"]
        b, n = obs.shape[0], obs.shape[1]
        rows = actor_input_rows(obs, batch["last_actions"])
        state = _batch_state(obs)
        graph = Graph()
        policy_nodes = self.actor.apply_per_agent(graph, rows, trainable=True)
        state_node = graph.constant(state)

        if self.cfg.gradient_estimator == "centralised":
            # MADDPG (with CPG): one critic scores the full current-policy
            # joint action; agent 0's critic is the scalar objective.
            joint = graph.concat(policy_nodes, axis=1)
            critic = self.critics[0]
            q = mlp_apply(graph, critic.params, critic.net,
                          graph.concat([state_node, joint], axis=1),
                          trainable=False)
            objective = graph.mean(q)
        else:
            # plain MADDPG: agent a's action from its policy, the rest replayed
            objective = None
            for a in range(n):
                blocks = []
                for j in range(n):
                    if j == a:
                        blocks.append(policy_nodes[j])
                    else:
                        blocks.append(graph.constant(
                            np.ascontiguousarray(rep_actions[:, j, :])))
                q = mlp_apply(graph, self.critics[a].params,
                              self.critics[a].net,
                              graph.concat([state_node] + blocks, axis=1),
                              trainable=False)
                m = graph.mean(q)
                objective = m if objective is None else graph.add(objective, m)

        loss = graph.scale(objective, -1.0)
        graph.backward(loss)
        sets = self.actor.param_sets()
        grads = [graph.collect_grads(ps) for ps in sets]
        return step_group(sets, grads, self.actor_opt, self.cfg.grad_clip)

    def train_step(self, batch, rng):
        loss = self._critic_update(batch)
        norm = self._policy_update(batch)
        self.sync(self.param_sets())
        return {"critic_loss": loss, "actor_grad_norm": norm}

    def param_sets(self):
        return list(self.actor.param_sets()) + [c.params for c in self.critics]

    def optimizer_states(self):
        opts = {f"actor{i}": st for i, st in enumerate(self.actor_opt)}
        opts.update({f"critic{i}": st for i, st in enumerate(self.critic_opt)})
        return opts

    def named_param_sets(self):
        named = {f"actor{i}": ps for i, ps in enumerate(self.actor.param_sets())}
        named.update({f"critic{i}": c.params for i, c in enumerate(self.critics)})
        return named


class IddpgLearner:
    """Independent DDPG: critic and actor condition on their own agent's
    observation only; the team reward stands in for per-agent rewards."""

    name = "iddpg"

    def __init__(self, info: EnvInfo, cfg: LearnerConfig,
                 exploration: ExplorationSpec, rng):
        if info.discrete:
            raise ValueError("iddpg covers continuous tasks")
        self.info = info
        self.cfg = cfg
        self.exploration = exploration
        self.actor = ActorBundle(info, cfg, rng, discrete=False)
        self.critic = build_utility_net(actor_input_dim(info), info.action_dim,
                                        info.n_agents, rng, cfg.hidden)
        self.actor_opt = [adam_init(ps, cfg.actor_lr)
                          for ps in self.actor.param_sets()]
        self.critic_opt = adam_init(self.critic.params, cfg.critic_lr)
        self.sync = TargetSync(cfg)

    def act(self, obs, last_action, step, rng, explore=True):
        out = self.actor.infer(actor_input_rows(obs[None], last_action[None]))
        if explore:
            return explore_continuous(out, self.exploration, step, rng)
        return out

    def train_step(self, batch, rng):
        obs, actions = batch["obs"], batch["actions"]
        b, n = obs.shape[0], obs.shape[1]
        # per-agent bootstrap on own observation only
        next_rows = actor_input_rows(batch["next_obs"], actions)
        next_act = self.actor.infer(next_rows, target=True)
        q_next = mlp_infer(self.critic.params, self.critic.net,
                           np.concatenate([next_rows, next_act], axis=1),
                           target=True).reshape(n, b).T
        y = td_target(batch["reward"][:, None], batch["terminal"][:, None],
                      q_next, self.cfg.gamma)

        rows = actor_input_rows(obs, batch["last_actions"])
        graph = Graph()
        util_in = graph.constant(
            np.concatenate([rows, agent_major(actions)], axis=1))
        q = utilities_apply(graph, self.critic, util_in)
        err = graph.sub(q, graph.constant(y))
        loss = graph.mean(graph.square(err))
        graph.backward(loss)
        step_group([self.critic.params], [graph.collect_grads(self.critic.params)],
                   [self.critic_opt], self.cfg.grad_clip)

        pgraph = Graph()
        act_nodes = self.actor.apply(pgraph, rows, trainable=True)
        q_pol = utilities_apply(
            pgraph, self.critic,
            pgraph.concat([pgraph.constant(rows), act_nodes], axis=1),
            trainable=False)
        objective = pgraph.mean(q_pol)
        ploss = pgraph.scale(objective, -1.0)
        pgraph.backward(ploss)
        sets = self.actor.param_sets()
        grads = [pgraph.collect_grads(ps) for ps in sets]
        norm = step_group(sets, grads, self.actor_opt, self.cfg.grad_clip)

        self.sync(self.param_sets())
        return {"critic_loss": float(loss.value), "actor_grad_norm": norm}

    def param_sets(self):
        return list(self.actor.param_sets()) + [self.critic.params]

    def optimizer_states(self):
        opts = {f"actor{i}": st for i, st in enumerate(self.actor_opt)}
        opts["critic"] = self.critic_opt
        return opts

    def named_param_sets(self):
        named = {f"actor{i}": ps for i, ps in enumerate(self.actor.param_sets())}
        named["critic"] = self.critic.params
        return named
