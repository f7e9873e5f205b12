"""Experiment harness: config resolution, the training/evaluation loop,
metrics, checkpoints, and the CLI."""

from .checkpoint import (CheckpointMismatchError, load_checkpoint,
                         load_manifest, save_checkpoint)
from .config import ConfigError, ExperimentConfig, resolve_config
from .metrics import MetricRow, MetricWriter, bootstrap_ci, emit_outputs
from .runner import evaluate, run_dir_for, run_experiment, run_seed

__all__ = [
    "ConfigError", "ExperimentConfig", "resolve_config",
    "MetricRow", "MetricWriter", "bootstrap_ci", "emit_outputs",
    "evaluate", "run_experiment", "run_seed", "run_dir_for",
    "save_checkpoint", "load_checkpoint", "load_manifest",
    "CheckpointMismatchError",
]
