"""Feedforward networks over the autodiff graph.

``ParamSet`` keeps online weights and a delayed target copy side by side with
identical keys; every in-place mutation (optimiser step, target sync) bumps a
version counter so stale tapes are detectable.
"""

from dataclasses import dataclass, field

import numpy as np

from .backend import ACT_CODES, kernels
from .graph import Graph

_HIDDEN_ACTS = ("relu", "elu", "tanh")
_OUTPUT_ACTS = ("identity", "tanh")


@dataclass(frozen=True)
class MLPSpec:
    """Widths and activations of a fully-connected network.

    ``layer_widths`` includes the input and output widths, so the smallest
    valid spec has two entries.
    """
    layer_widths: tuple
    hidden_activation: str = "relu"
    output_activation: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if len(self.layer_widths) < 2:
            raise ValueError("layer_widths needs at least input and output entries")
        if any(w <= 0 for w in self.layer_widths):
            raise ValueError(f"layer widths must be positive: {self.layer_widths}")
        if self.hidden_activation not in _HIDDEN_ACTS:
            raise ValueError(f"hidden_activation must be one of {_HIDDEN_ACTS}")
        if self.output_activation not in _OUTPUT_ACTS:
            raise ValueError(f"output_activation must be one of {_OUTPUT_ACTS}")

    @property
    def in_dim(self):
        return self.layer_widths[0]

    @property
    def out_dim(self):
        return self.layer_widths[-1]

    @property
    def n_layers(self):
        return len(self.layer_widths) - 1


@dataclass
class ParamSet:
    """Named parameter arrays plus their delayed target copies."""
    entries: dict = field(default_factory=dict)
    target_entries: dict = field(default_factory=dict)
    version: int = 0

    def bump(self):
        self.version += 1

    def names(self):
        return list(self.entries)

    def n_scalars(self):
        return sum(v.size for v in self.entries.values())

    def copy(self):
        return ParamSet(
            {k: v.copy() for k, v in self.entries.items()},
            {k: v.copy() for k, v in self.target_entries.items()},
            self.version,
        )

    def validate(self):
        if set(self.entries) != set(self.target_entries):
            raise ValueError("online and target entries have different keys")
        for name, v in self.entries.items():
            if self.target_entries[name].shape != v.shape:
                raise ValueError(f"target shape mismatch for {name!r}")


def build_network(spec: MLPSpec, rng, prefix: str = "") -> ParamSet:
    """Initialise an MLP with U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights.

    The target copy starts bit-identical to the online weights.
    """
    entries = {}
    for i, (fan_in, fan_out) in enumerate(zip(spec.layer_widths[:-1],
                                              spec.layer_widths[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        entries[f"{prefix}w{i}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        entries[f"{prefix}b{i}"] = rng.uniform(-bound, bound, size=(fan_out,))
    targets = {k: v.copy() for k, v in entries.items()}
    return ParamSet(entries, targets)


def build_into(params: ParamSet, spec: MLPSpec, rng, prefix: str):
    """Add a prefixed MLP to an existing ParamSet (for multi-net bundles)."""
    sub = build_network(spec, rng, prefix=prefix)
    params.entries.update(sub.entries)
    params.target_entries.update(sub.target_entries)
    return params


def mlp_apply(graph: Graph, params: ParamSet, spec: MLPSpec, x,
              target=False, trainable=True, prefix: str = ""):
    """Record the MLP forward pass on ``graph`` and return the output node."""
    if x.value.ndim != 2 or x.value.shape[1] != spec.in_dim:
        raise ValueError(
            f"input shape {x.value.shape} incompatible with spec input width "
            f"{spec.in_dim}")
    h = x
    last = spec.n_layers - 1
    for i in range(spec.n_layers):
        w = graph.param(params, f"{prefix}w{i}", target, trainable)
        b = graph.param(params, f"{prefix}b{i}", target, trainable)
        act = spec.output_activation if i == last else spec.hidden_activation
        h = graph.affine(h, w, b, act)
    return h


def mlp_infer(params: ParamSet, spec: MLPSpec, x, target=False, prefix: str = ""):
    """Plain forward pass without a tape (rollouts, evaluation)."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != spec.in_dim:
        raise ValueError(
            f"input shape {x.shape} incompatible with spec input width {spec.in_dim}")
    store = params.target_entries if target else params.entries
    h = np.ascontiguousarray(x)
    last = spec.n_layers - 1
    for i in range(spec.n_layers):
        act = spec.output_activation if i == last else spec.hidden_activation
        h = kernels.affine_forward(h, store[f"{prefix}w{i}"], store[f"{prefix}b{i}"],
                                   ACT_CODES[act])
    return h[0] if squeeze else h


class Tape:
    """Recorded forward pass of one network; the handle ``backward`` consumes."""

    def __init__(self, graph, params, input_node, output_node):
        self.graph = graph
        self.params = params
        self.input_node = input_node
        self.output_node = output_node

    @property
    def output(self):
        return self.output_node.value


def forward(params: ParamSet, spec: MLPSpec, x):
    """Run the network and return (output, tape) for exact differentiation."""
    graph = Graph()
    x_node = graph.input(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    out = mlp_apply(graph, params, spec, x_node)
    return out.value, Tape(graph, params, x_node, out)


def backward(tape: Tape, output_seed):
    """Gradients of the taped computation: (name -> grad map, input gradient)."""
    tape.graph.backward(tape.output_node, output_seed)
    grads = tape.graph.collect_grads(tape.params)
    input_grad = tape.input_node.grad
    if input_grad is None:
        input_grad = np.zeros_like(tape.input_node.value)
    return grads, input_grad
