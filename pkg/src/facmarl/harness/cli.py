"""Command line interface: run / evaluate / plot / sweep."""

import argparse
import itertools
import os
import sys


def build_parser():
    parser = argparse.ArgumentParser(
        prog="facmarl",
        description="Factored multi-agent actor-critic experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=False, help="key = value config file")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key")

    ev = sub.add_parser("evaluate", help="evaluate a checkpoint greedily")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--episodes", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)

    plot = sub.add_parser("plot", help="aggregate curves for a run directory")
    plot.add_argument("--run-dir", required=True)
    plot.add_argument("--png", action="store_true",
                      help="also render curves.png (needs matplotlib)")

    sweep = sub.add_parser("sweep", help="cartesian sweep over a grid file")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--grid", required=True,
                       help="file of 'key = v1 | v2 | ...' lines")
    sweep.add_argument("--set", dest="overrides", action="append", default=[])
    return parser


def cmd_run(args):
    from .config import resolve_config
    from .runner import run_experiment

    config = resolve_config(args.config, args.overrides)
    run_dir = run_experiment(config)
    print(f"run complete: {run_dir}")
    return 0


def cmd_evaluate(args):
    import numpy as np

    from ..envs import make_env
    from ..learners import build_learner, from_env
    from .checkpoint import load_checkpoint, load_manifest
    from .config import resolve_config
    from .runner import evaluate

    manifest = load_manifest(args.checkpoint)
    config = resolve_config(file_text=manifest["resolved_config"])
    env = make_env(config.env)
    learner = build_learner(from_env(env), config.learner, config.exploration,
                            np.random.default_rng(0))
    load_checkpoint(args.checkpoint, learner,
                    config_hash=config.config_hash())
    returns = evaluate(learner, env, args.episodes,
                       np.random.default_rng(args.seed))
    print(f"episodes: {len(returns)}")
    print(f"mean return: {float(np.mean(returns)):.6g}")
    print("returns:", " ".join(f"{r:.6g}" for r in returns))
    return 0


def cmd_plot(args):
    import json

    from .metrics import emit_outputs

    merged, curves = emit_outputs(args.run_dir)
    print(f"wrote {merged}")
    print(f"wrote {curves}")
    if args.png:
        try:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib not installed; skipping PNG", file=sys.stderr)
            return 1
        with open(curves) as fh:
            data = json.load(fh)
        steps = [p["step"] for p in data["curve"]]
        mean = [p["mean"] for p in data["curve"]]
        lo = [p["ci_low"] for p in data["curve"]]
        hi = [p["ci_high"] for p in data["curve"]]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(steps, mean, label="mean test return")
        ax.fill_between(steps, lo, hi, alpha=0.25, label="95% CI")
        ax.set_xlabel("environment steps")
        ax.set_ylabel("mean test return")
        ax.legend()
        fig.tight_layout()
        out = os.path.join(args.run_dir, "curves.png")
        fig.savefig(out, dpi=120)
        print(f"wrote {out}")
    return 0


def _parse_grid(path):
    from .config import SCHEMA, ConfigError

    axes = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = v1 | v2'")
            key, values = (p.strip() for p in line.split("=", 1))
            if key not in SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            axes.append((key, [v.strip() for v in values.split("|")]))
    return axes


def cmd_sweep(args):
    from .config import resolve_config
    from .runner import run_experiment

    axes = _parse_grid(args.grid)
    names = [k for k, _ in axes]
    for combo in itertools.product(*(vals for _, vals in axes)):
        overrides = list(args.overrides)
        overrides += [f"{k}={v}" for k, v in zip(names, combo)]
        tag = "_".join(f"{k.split('.')[-1]}-{v}" for k, v in zip(names, combo))
        config = resolve_config(args.config, overrides)
        config.name = f"{config.name}_{tag}"
        run_dir = run_experiment(config)
        print(f"sweep point done: {run_dir}")
    return 0


def main(argv=None):
    # keep each process on one BLAS thread; parallelism comes from seed workers
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "evaluate": cmd_evaluate,
                "plot": cmd_plot, "sweep": cmd_sweep}
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
