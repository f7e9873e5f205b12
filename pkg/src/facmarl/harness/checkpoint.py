"""Checkpoints: named float arrays in an .npz container plus a JSON manifest
(config hash, resolved config text, RNG states, counters)."""

import json
import os

import numpy as np


class CheckpointMismatchError(RuntimeError):
    """Checkpoint was produced under a different resolved configuration."""


def _rng_state(rng):
    return json.loads(json.dumps(rng.bit_generator.state))


def _restore_rng(state):
    rng = np.random.default_rng()
    rng.bit_generator.state = state
    return rng


def save_checkpoint(path, step, learner, buffer=None, env=None, rngs=None,
                    config_hash="", resolved_text=""):
    arrays = {}
    for name, ps in learner.named_param_sets().items():
        for pname, v in ps.entries.items():
            arrays[f"param/{name}/online/{pname}"] = v
        for pname, v in ps.target_entries.items():
            arrays[f"param/{name}/target/{pname}"] = v
    for name, st in learner.optimizer_states().items():
        for pname, v in st.first_moment.items():
            arrays[f"opt/{name}/m/{pname}"] = v
            arrays[f"opt/{name}/v/{pname}"] = st.second_moment[pname]
        arrays[f"opt/{name}/step_count"] = np.array([st.step_count])
    arrays["sync_calls"] = np.array([learner.sync.calls])
    if buffer is not None:
        for k, v in buffer.state_arrays().items():
            arrays[f"buffer/{k}"] = v
    if env is not None and hasattr(env, "get_state_arrays"):
        for k, v in env.get_state_arrays().items():
            arrays[f"env/{k}"] = v

    os.makedirs(path, exist_ok=True)
    np.savez(os.path.join(path, "arrays.npz"), **arrays)
    manifest = {
        "step": int(step),
        "config_hash": config_hash,
        "resolved_config": resolved_text,
        "rng_states": {k: _rng_state(v) for k, v in (rngs or {}).items()},
        "format": "facmarl-checkpoint-v1",
        "byte_order": "little",
    }
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path


def load_manifest(path):
    with open(os.path.join(path, "manifest.json")) as fh:
        return json.load(fh)


def load_checkpoint(path, learner, buffer=None, env=None, config_hash=None):
    """Restore parameters, optimiser moments, buffer, env and RNG states in
    place.  Returns (step, restored rng dict)."""
    manifest = load_manifest(path)
    if config_hash is not None and manifest["config_hash"] != config_hash:
        raise CheckpointMismatchError(
            f"checkpoint hash {manifest['config_hash']} != expected {config_hash}")
    with np.load(os.path.join(path, "arrays.npz")) as data:
        arrays = {k: data[k] for k in data.files}

    for name, ps in learner.named_param_sets().items():
        for pname in ps.entries:
            ps.entries[pname][...] = arrays[f"param/{name}/online/{pname}"]
            ps.target_entries[pname][...] = arrays[f"param/{name}/target/{pname}"]
        ps.bump()
    for name, st in learner.optimizer_states().items():
        for pname in st.first_moment:
            st.first_moment[pname][...] = arrays[f"opt/{name}/m/{pname}"]
            st.second_moment[pname][...] = arrays[f"opt/{name}/v/{pname}"]
        st.step_count = int(arrays[f"opt/{name}/step_count"][0])
    learner.sync.calls = int(arrays["sync_calls"][0])
    if buffer is not None:
        buf_arrays = {k[len("buffer/"):]: v for k, v in arrays.items()
                      if k.startswith("buffer/")}
        if buf_arrays:
            buffer.load_state_arrays(buf_arrays)
    if env is not None and hasattr(env, "set_state_arrays"):
        env_arrays = {k[len("env/"):]: v for k, v in arrays.items()
                      if k.startswith("env/")}
        env.set_state_arrays(env_arrays)
    rngs = {k: _restore_rng(v) for k, v in manifest["rng_states"].items()}
    return manifest["step"], rngs
