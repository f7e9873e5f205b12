"""Experiment configuration: flat ``key = value`` text files with dotted
section keys, resolved against built-in per-environment defaults with
CLI overrides taking top precedence.  Unknown keys are hard errors."""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..agents import ExplorationSpec
from ..critics import MixerSpec
from ..envs import NONMONOTONIC_PAYOFF, EnvSpec
from ..learners import CEMConfig, LearnerConfig


class ConfigError(ValueError):
    pass


def _parse_bool(s):
    if s.lower() in ("true", "1", "yes", "on"):
        return True
    if s.lower() in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_int_list(s):
    return tuple(int(x) for x in s.replace(",", " ").split())


def _parse_payoff(s):
    named = {"nonmonotonic3": NONMONOTONIC_PAYOFF,
             "identity2": np.eye(2),
             "identity3": np.eye(3)}
    if s in named:
        return named[s].copy()
    rows = [r.split() for r in s.split(";") if r.strip()]
    return np.array([[float(x) for x in r] for r in rows])


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ", ".join(str(x) for x in v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, np.ndarray):
        return "; ".join(" ".join(format(x, "g") for x in row)
                         for row in np.atleast_2d(v))
    return str(v)


# key -> parser; every knob an experiment can set lives here
SCHEMA = {
    "env.kind": str,
    "env.n_agents": int,
    "env.n_prey": int,
    "env.episode_limit": int,
    "env.view_radius": float,
    "env.world_size": float,
    "env.payoff": _parse_payoff,
    "learner.algorithm": str,
    "learner.mixer.kind": str,
    "learner.mixer.embed_dim": int,
    "learner.mixer.hypernet_hidden": int,
    "learner.gradient_estimator": str,
    "learner.gamma": float,
    "learner.actor_lr": float,
    "learner.critic_lr": float,
    "learner.tau": float,
    "learner.target_period": int,
    "learner.batch_size": int,
    "learner.buffer_capacity": int,
    "learner.train_start": int,
    "learner.grad_clip": float,
    "learner.share_actor": _parse_bool,
    "learner.hidden": _parse_int_list,
    "learner.gumbel_temperature": float,
    "learner.cem.n_iterations": int,
    "learner.cem.samples_per_iteration": int,
    "learner.cem.elite_count": int,
    "explore.gaussian_sigma": float,
    "explore.warmup_uniform_steps": int,
    "explore.epsilon_start": float,
    "explore.epsilon_end": float,
    "explore.epsilon_anneal_steps": int,
    "run.total_steps": int,
    "run.eval_interval": int,
    "run.eval_episodes": int,
    "run.seeds": _parse_int_list,
    "run.output_dir": str,
    "run.checkpoint_interval": int,
    "run.workers": int,
    "run.name": str,
}

_BASE_DEFAULTS = {
    "env.kind": "predator_prey",
    "env.n_agents": 3,
    "env.n_prey": -1,
    "env.episode_limit": 25,
    "env.view_radius": 0.874,
    "env.world_size": 2.0,
    "learner.algorithm": "facmac",
    "learner.mixer.kind": "monotonic",
    "learner.mixer.embed_dim": 32,
    "learner.mixer.hypernet_hidden": 64,
    "learner.gamma": 0.85,
    "learner.actor_lr": 0.01,
    "learner.critic_lr": 0.01,
    "learner.tau": 0.001,
    "learner.target_period": 0,
    "learner.batch_size": 1024,
    "learner.buffer_capacity": 1_000_000,
    "learner.train_start": 0,
    "learner.grad_clip": 10.0,
    "learner.share_actor": True,
    "learner.hidden": (64, 64),
    "learner.gumbel_temperature": 1.0,
    "learner.cem.n_iterations": 2,
    "learner.cem.samples_per_iteration": 64,
    "learner.cem.elite_count": 6,
    "explore.gaussian_sigma": 0.1,
    "explore.warmup_uniform_steps": 0,
    "explore.epsilon_start": 0.5,
    "explore.epsilon_end": 0.05,
    "explore.epsilon_anneal_steps": 50000,
    "run.total_steps": 2_000_000,
    "run.eval_interval": 2000,
    "run.eval_episodes": 10,
    "run.seeds": (0, 1, 2),
    "run.output_dir": "runs",
    "run.checkpoint_interval": 0,
    "run.workers": 1,
    "run.name": "experiment",
}

_KIND_DEFAULTS = {
    "continuous_matrix_game": {
        "env.episode_limit": 1,
        "learner.batch_size": 64,
        "learner.buffer_capacity": 200_000,
        "run.total_steps": 100_000,
    },
    "discrete_matrix_game": {
        "env.episode_limit": 1,
        "learner.batch_size": 32,
        "learner.buffer_capacity": 5000,
        "learner.target_period": 200,
        "learner.actor_lr": 0.0025,
        "learner.critic_lr": 0.0005,
        "learner.gamma": 0.99,
        "run.total_steps": 5000,
    },
}

# estimator defaults follow the algorithm: MADDPG's classic update is
# per-agent; the factored learner uses the centralised estimator
_ALG_DEFAULTS = {
    "maddpg": {"learner.gradient_estimator": "per_agent"},
    "facmac": {"learner.gradient_estimator": "centralised"},
    "iddpg": {"learner.gradient_estimator": "per_agent"},
    "covdn": {"learner.gradient_estimator": "centralised"},
    "comix": {"learner.gradient_estimator": "centralised"},
}


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = SCHEMA[key](value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}")
    return out


def parse_overrides(pairs):
    """['key=value', ...] from the command line."""
    merged = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override must look like key=value: {pair!r}")
        merged.update(parse_config_text(pair, source="<cli>"))
    return merged


@dataclass
class ExperimentConfig:
    env: EnvSpec
    learner: LearnerConfig
    exploration: ExplorationSpec
    total_steps: int
    eval_interval: int
    eval_episodes: int
    seeds: tuple
    output_dir: str
    checkpoint_interval: int
    workers: int
    name: str
    resolved: dict = field(default_factory=dict, repr=False)

    def resolved_text(self):
        lines = [f"{k} = {_fmt(self.resolved[k])}" for k in sorted(self.resolved)]
        return "\n".join(lines) + "\n"

    def config_hash(self):
        return hashlib.sha256(self.resolved_text().encode()).hexdigest()[:16]


def resolve_config(file_path=None, cli_overrides=None, file_text=None) -> ExperimentConfig:
    """Precedence: CLI overrides > file values > built-in defaults."""
    if file_text is None and file_path is not None:
        with open(file_path) as fh:
            file_text = fh.read()
    file_vals = parse_config_text(file_text, source=str(file_path or "<text>")) \
        if file_text is not None else {}
    cli_vals = parse_overrides(cli_overrides)

    probe = {**file_vals, **cli_vals}
    kind = probe.get("env.kind", _BASE_DEFAULTS["env.kind"])
    alg = probe.get("learner.algorithm", _BASE_DEFAULTS["learner.algorithm"])
    resolved = dict(_BASE_DEFAULTS)
    resolved.update(_KIND_DEFAULTS.get(kind, {}))
    resolved.update(_ALG_DEFAULTS.get(alg, {}))
    resolved.update(file_vals)
    resolved.update(cli_vals)

    try:
        env = EnvSpec(kind=resolved["env.kind"], n_agents=resolved["env.n_agents"],
                      n_prey=resolved["env.n_prey"],
                      episode_limit=resolved["env.episode_limit"],
                      view_radius=resolved["env.view_radius"],
                      world_size=resolved["env.world_size"],
                      payoff=resolved.get("env.payoff"))
        mixer = MixerSpec(resolved["learner.mixer.kind"],
                          resolved["learner.mixer.embed_dim"],
                          resolved["learner.mixer.hypernet_hidden"])
        cem = CEMConfig(resolved["learner.cem.n_iterations"],
                        resolved["learner.cem.samples_per_iteration"],
                        resolved["learner.cem.elite_count"])
        learner = LearnerConfig(
            algorithm=resolved["learner.algorithm"], mixer=mixer,
            gradient_estimator=resolved["learner.gradient_estimator"],
            gamma=resolved["learner.gamma"],
            actor_lr=resolved["learner.actor_lr"],
            critic_lr=resolved["learner.critic_lr"],
            tau=resolved["learner.tau"],
            target_period=resolved["learner.target_period"],
            batch_size=resolved["learner.batch_size"],
            buffer_capacity=resolved["learner.buffer_capacity"],
            train_start=resolved["learner.train_start"],
            grad_clip=resolved["learner.grad_clip"],
            share_actor=resolved["learner.share_actor"],
            hidden=tuple(resolved["learner.hidden"]),
            gumbel_temperature=resolved["learner.gumbel_temperature"],
            cem=cem)
        exploration = ExplorationSpec(
            gaussian_sigma=resolved["explore.gaussian_sigma"],
            warmup_uniform_steps=resolved["explore.warmup_uniform_steps"],
            epsilon_start=resolved["explore.epsilon_start"],
            epsilon_end=resolved["explore.epsilon_end"],
            epsilon_anneal_steps=resolved["explore.epsilon_anneal_steps"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc))

    if resolved["run.total_steps"] < 0 or resolved["run.eval_interval"] <= 0:
        raise ConfigError("run.total_steps must be >= 0 and eval_interval > 0")
    if resolved["run.eval_episodes"] < 1:
        raise ConfigError("run.eval_episodes must be >= 1")

    drop_payoff = resolved.get("env.payoff") is None
    if drop_payoff:
        resolved.pop("env.payoff", None)
    return ExperimentConfig(
        env=env, learner=learner, exploration=exploration,
        total_steps=resolved["run.total_steps"],
        eval_interval=resolved["run.eval_interval"],
        eval_episodes=resolved["run.eval_episodes"],
        seeds=tuple(resolved["run.seeds"]),
        output_dir=resolved["run.output_dir"],
        checkpoint_interval=resolved["run.checkpoint_interval"],
        workers=resolved["run.workers"],
        name=resolved["run.name"],
        resolved=resolved)
