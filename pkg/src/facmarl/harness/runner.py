"""Experiment execution: seeded training loops with paused evaluations,
crash-safe metric appends, checkpointing, and optional per-seed workers."""

import os
import time
import traceback

import numpy as np

from ..envs import make_env
from ..learners import ReplayBuffer, build_learner, from_env
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig
from .metrics import MetricRow, MetricWriter, emit_outputs

_EXTRAS = ("critic_loss", "actor_grad_norm", "exploration_param")


def _limit_blas_threads():
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(1)
    except Exception:
        pass


def output_root(config: ExperimentConfig):
    return os.environ.get("FACMARL_OUT", config.output_dir)


def run_dir_for(config: ExperimentConfig):
    return os.path.join(output_root(config), config.name)


def _onehot(indices, k):
    out = np.zeros((len(indices), k))
    out[np.arange(len(indices)), np.asarray(indices, dtype=int)] = 1.0
    return out


def _stored_action(env, learner, action):
    """Action representation kept in the buffer and fed to networks."""
    if env.discrete:
        return _onehot(np.asarray(action).reshape(-1), env.n_actions)
    return np.asarray(action, dtype=np.float64).reshape(env.n_agents, -1)


def evaluate(learner, env, n_episodes, rng):
    """Greedy decentralised evaluation; returns undiscounted episode returns.

    Never mutates learner state: parameters and buffers are untouched, and
    the caller supplies a dedicated RNG.
    """
    returns = []
    da = env.n_actions if env.discrete else env.action_dim
    for _ in range(n_episodes):
        obs, _ = env.reset(rng)
        last = np.zeros((env.n_agents, da))
        total = 0.0
        while True:
            action = learner.act(obs, last, step=0, rng=rng, explore=False)
            res = env.step(action)
            total += res.reward
            last = _stored_action(env, learner, action)
            obs = res.observations
            if res.terminal:
                break
        returns.append(total)
    return returns


def _seed_rngs(seed):
    return {"env": np.random.default_rng([seed, 0]),
            "explore": np.random.default_rng([seed, 1]),
            "train": np.random.default_rng([seed, 2])}


def run_seed(config: ExperimentConfig, seed, run_dir, resume_from=None,
             total_steps=None):
    """Train one seed; returns the seed directory.

    ``resume_from``: checkpoint directory to restore before continuing.
    """
    _limit_blas_threads()
    total_steps = config.total_steps if total_steps is None else total_steps
    seed_dir = os.path.join(run_dir, f"seed_{seed}")
    os.makedirs(seed_dir, exist_ok=True)

    env = make_env(config.env)
    info = from_env(env)
    learner = build_learner(info, config.learner, config.exploration,
                            np.random.default_rng([seed, 9]))
    buffer = ReplayBuffer(max(config.learner.buffer_capacity,
                              config.learner.batch_size))
    rngs = _seed_rngs(seed)
    da = env.n_actions if env.discrete else env.action_dim

    start_step = 0
    obs, _ = env.reset(rngs["env"])
    last = np.zeros((env.n_agents, da))
    if resume_from is not None:
        start_step, restored = load_checkpoint(resume_from, learner, buffer, env,
                                               config_hash=config.config_hash())
        rngs.update({k: v for k, v in restored.items() if k in rngs})
        env._rng = rngs["env"]  # the restored stream, not the one reset() saw
        ctx = np.load(os.path.join(resume_from, "context.npz"))
        obs = ctx["obs"]
        last = ctx["last_action"]

    writer = MetricWriter(os.path.join(seed_dir, "metrics.csv"),
                          config.eval_episodes, _EXTRAS)
    with open(os.path.join(seed_dir, "config.cfg"), "w") as fh:
        fh.write(config.resolved_text())

    recent = {"critic_loss": [], "actor_grad_norm": []}
    t_start = time.time()

    def exploration_param(step):
        if env.discrete:
            return config.exploration.epsilon_at(step)
        return config.exploration.gaussian_sigma

    def run_eval(step):
        eval_rng = np.random.default_rng([seed, 1000, step])
        eval_env = make_env(config.env)
        rets = evaluate(learner, eval_env, config.eval_episodes, eval_rng)
        extras = {k: (float(np.mean(v)) if v else 0.0)
                  for k, v in recent.items()}
        extras["exploration_param"] = exploration_param(step)
        writer.append(MetricRow(step, seed, float(np.mean(rets)), tuple(rets),
                                extras, time.time() - t_start))
        recent["critic_loss"].clear()
        recent["actor_grad_norm"].clear()

    def checkpoint(step):
        path = os.path.join(seed_dir, f"checkpoint_{step}")
        save_checkpoint(path, step, learner, buffer, env, rngs,
                        config_hash=config.config_hash(),
                        resolved_text=config.resolved_text())
        np.savez(os.path.join(path, "context.npz"), obs=obs, last_action=last)
        return path

    if start_step == 0:
        run_eval(0)

    min_fill = max(config.learner.batch_size, config.learner.train_start)
    for t in range(start_step + 1, total_steps + 1):
        action = learner.act(obs, last, t, rngs["explore"], explore=True)
        res = env.step(action)
        stored = _stored_action(env, learner, action)
        buffer.push({"obs": obs, "actions": stored, "reward": res.reward,
                     "next_obs": res.observations, "terminal": float(res.terminal),
                     "last_actions": last})
        obs = res.observations
        last = stored
        if res.terminal:
            obs, _ = env.reset(rngs["env"])
            last = np.zeros((env.n_agents, da))
        if len(buffer) >= min_fill:
            metrics = learner.train_step(
                buffer.sample(config.learner.batch_size, rngs["train"]),
                rngs["train"])
            for k in recent:
                if k in metrics:
                    recent[k].append(metrics[k])
        if t % config.eval_interval == 0:
            run_eval(t)
            if config.checkpoint_interval and t % config.checkpoint_interval == 0:
                checkpoint(t)

    checkpoint(total_steps)
    return seed_dir


def _seed_worker(args):
    config, seed, run_dir = args
    try:
        run_seed(config, seed, run_dir)
        return seed, None
    except Exception:
        return seed, traceback.format_exc()


def run_experiment(config: ExperimentConfig):
    """Run every configured seed; failed seeds are recorded, others proceed."""
    run_dir = run_dir_for(config)
    os.makedirs(run_dir, exist_ok=True)
    with open(os.path.join(run_dir, "config.cfg"), "w") as fh:
        fh.write(config.resolved_text())

    failures = {}
    if config.workers > 1 and len(config.seeds) > 1:
        import multiprocessing as mp
        ctx = mp.get_context("fork")
        with ctx.Pool(min(config.workers, len(config.seeds))) as pool:
            for seed, err in pool.imap_unordered(
                    _seed_worker,
                    [(config, s, run_dir) for s in config.seeds]):
                if err:
                    failures[seed] = err
    else:
        for seed in config.seeds:
            _, err = _seed_worker((config, seed, run_dir))
            if err:
                failures[seed] = err

    for seed, err in failures.items():
        with open(os.path.join(run_dir, f"seed_{seed}_FAILED.txt"), "w") as fh:
            fh.write(err)
    emit_outputs(run_dir)
    return run_dir
