"""Metric rows, crash-safe CSV appends, and cross-seed curve aggregation."""

import csv
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class MetricRow:
    step: int
    seed: int
    mean_test_return: float
    episode_returns: tuple
    extras: dict = field(default_factory=dict)
    wall_clock_seconds: float = 0.0


def _fmt(v):
    return format(float(v), ".17g")


class MetricWriter:
    """Appends one CSV row per evaluation pause; a killed run leaves a valid
    prefix.  The wall-clock column stays last so byte comparisons can drop it."""

    def __init__(self, path, n_episodes, extra_names):
        self.path = path
        self.extra_names = tuple(extra_names)
        self.n_episodes = n_episodes
        header = (["step", "seed", "mean_test_return"]
                  + [f"ep_return_{i}" for i in range(n_episodes)]
                  + list(self.extra_names) + ["wall_clock_seconds"])
        self._header = ",".join(header)
        if not os.path.exists(path):
            with open(path, "a") as fh:
                fh.write(self._header + "\n")
                fh.flush()

    def append(self, row: MetricRow):
        cells = [str(row.step), str(row.seed), _fmt(row.mean_test_return)]
        cells += [_fmt(r) for r in row.episode_returns]
        cells += [_fmt(row.extras.get(k, 0.0)) for k in self.extra_names]
        cells += [_fmt(row.wall_clock_seconds)]
        with open(self.path, "a") as fh:
            fh.write(",".join(cells) + "\n")
            fh.flush()


def read_metrics(path):
    with open(path) as fh:
        reader = csv.DictReader(fh)
        return list(reader)


def bootstrap_ci(values, n_resamples=1000, alpha=0.05, seed=0):
    """Percentile bootstrap over seeds; collapses to the point for one value."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 1:
        v = float(values[0])
        return v, v
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, values.size, size=(n_resamples, values.size))
    means = values[idx].mean(axis=1)
    return (float(np.quantile(means, alpha / 2)),
            float(np.quantile(means, 1 - alpha / 2)))


def emit_outputs(run_dir):
    """Merge per-seed CSVs into metrics.csv and write curves.json with the
    per-step mean and 95% bootstrap confidence band across seeds."""
    seed_dirs = sorted(d for d in os.listdir(run_dir) if d.startswith("seed_"))
    rows = []
    for d in seed_dirs:
        path = os.path.join(run_dir, d, "metrics.csv")
        if os.path.exists(path):
            rows.extend(read_metrics(path))
    if not rows:
        raise ValueError(f"no metric rows found under {run_dir}")

    fields = list(rows[0].keys())
    merged = os.path.join(run_dir, "metrics.csv")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for row in sorted(rows, key=lambda r: (int(r["step"]), int(r["seed"]))):
        writer.writerow(row)
    with open(merged, "w") as fh:
        fh.write(buf.getvalue())

    by_step = {}
    for row in rows:
        by_step.setdefault(int(row["step"]), []).append(float(row["mean_test_return"]))
    curve = []
    for step in sorted(by_step):
        vals = by_step[step]
        lo, hi = bootstrap_ci(vals)
        curve.append({"step": step, "mean": float(np.mean(vals)),
                      "ci_low": lo, "ci_high": hi, "n_seeds": len(vals)})
    out = {"run_dir": os.path.abspath(run_dir), "curve": curve}
    with open(os.path.join(run_dir, "curves.json"), "w") as fh:
        json.dump(out, fh, indent=2)
    return merged, os.path.join(run_dir, "curves.json")
