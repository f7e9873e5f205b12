"""Reverse-mode differentiation over dense float64 arrays.

A ``Graph`` records every operation as it executes (define-by-run); calling
``backward`` on a recorded node walks the tape in reverse and accumulates
gradients into every node that was marked as wanting them.  Values are plain
C-contiguous NumPy arrays; the heavy layer/mixing kernels go through the
selected backend (compiled or NumPy, see ``backend``).

Parameter nodes remember the owning ``ParamSet`` version at record time, so a
backward pass over a tape whose parameters were updated in the meantime fails
loudly instead of silently producing gradients for the wrong weights.
"""

import numpy as np

from .backend import ACT_CODES, kernels


class StaleTapeError(RuntimeError):
    """Backward was requested after the recorded parameters were mutated."""


class Node:
    __slots__ = ("value", "grad", "needs_grad", "_backward")

    def __init__(self, value, needs_grad=False, backward=None):
        self.value = value
        self.grad = None
        self.needs_grad = needs_grad
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape


def _accumulate(node, g):
    # Never in place: backward closures may hand the same array to several
    # parents, so accumulation must not mutate shared buffers.
    node.grad = g if node.grad is None else node.grad + g


class Graph:
    """One recorded computation, replayable backwards exactly once per seed."""

    def __init__(self):
        self.nodes = []
        self._param_nodes = {}   # (id(ParamSet), name, target) -> Node
        self._param_sets = {}    # id(ParamSet) -> (ParamSet, version at record time)

    def _record(self, value, needs_grad, backward):
        node = Node(np.asarray(value, dtype=np.float64), needs_grad,
                    backward if needs_grad else None)
        self.nodes.append(node)
        return node

    # ---- leaves ----

    def constant(self, value):
        return self._record(value, False, None)

    def input(self, value):
        """Leaf whose gradient is wanted (e.g. action inputs)."""
        node = Node(np.ascontiguousarray(value, dtype=np.float64), True, None)
        self.nodes.append(node)
        return node

    def param(self, params, name, target=False, trainable=True):
        """Leaf bound to ``params.entries[name]`` (or the target copy).

        Repeated requests return the same node, so gradients collected after
        backward cover each parameter exactly once.
        """
        key = (id(params), name, target)
        node = self._param_nodes.get(key)
        if node is None:
            store = params.target_entries if target else params.entries
            node = Node(store[name], trainable, None)
            self.nodes.append(node)
            self._param_nodes[key] = node
            self._param_sets[id(params)] = (params, params.version)
        return node

    # ---- dense layers ----

    def affine(self, x, w, b, activation="identity"):
        act = ACT_CODES[activation]
        y = kernels.affine_forward(x.value, w.value, b.value, act)
        needs = x.needs_grad or w.needs_grad or b.needs_grad

        def backward(dy):
            dx, dw, db = kernels.affine_backward(
                x.value, w.value, out.value, dy, act,
                x.needs_grad, w.needs_grad or b.needs_grad)
            if dx is not None:
                _accumulate(x, dx)
            if dw is not None:
                _accumulate(w, dw)
                _accumulate(b, db)

        out = self._record(y, needs, backward)
        return out

    def mix(self, q, w):
        """out[b, e] = sum_n q[b, n] * w[b, n, e]."""
        y = kernels.mix_forward(q.value, w.value)
        needs = q.needs_grad or w.needs_grad

        def backward(dy):
            dq, dw = kernels.mix_backward(q.value, w.value, dy,
                                          q.needs_grad, w.needs_grad)
            if dq is not None:
                _accumulate(q, dq)
            if dw is not None:
                _accumulate(w, dw)

        return self._record(y, needs, backward)

    # ---- elementwise ----

    def _unary(self, x, value, dfn):
        def backward(dy):
            _accumulate(x, dfn(dy))
        return self._record(value, x.needs_grad, backward)

    def relu(self, x):
        y = np.maximum(x.value, 0.0)
        return self._unary(x, y, lambda dy: dy * (y > 0.0))

    def tanh(self, x):
        y = np.tanh(x.value)
        return self._unary(x, y, lambda dy: dy * (1.0 - y * y))

    def elu(self, x):
        v = x.value
        y = np.where(v < 0.0, np.expm1(v), v)
        return self._unary(x, y, lambda dy: dy * np.where(v < 0.0, y + 1.0, 1.0))

    def absolute(self, x):
        y = np.abs(x.value)
        return self._unary(x, y, lambda dy: dy * np.sign(x.value))

    def square(self, x):
        return self._unary(x, x.value * x.value, lambda dy: dy * (2.0 * x.value))

    def scale(self, x, c):
        return self._unary(x, x.value * c, lambda dy: dy * c)

    def add_const(self, x, c):
        return self._unary(x, x.value + c, lambda dy: dy)

    def reshape(self, x, shape):
        y = x.value.reshape(shape)
        return self._unary(x, y, lambda dy: dy.reshape(x.value.shape))

    def transpose(self, x):
        y = np.ascontiguousarray(x.value.T)
        return self._unary(x, y, lambda dy: np.ascontiguousarray(dy.T))

    def add(self, a, b):
        if a.value.shape != b.value.shape:
            raise ValueError(f"add shape mismatch {a.value.shape} vs {b.value.shape}")
        needs = a.needs_grad or b.needs_grad

        def backward(dy):
            if a.needs_grad:
                _accumulate(a, dy)
            if b.needs_grad:
                _accumulate(b, dy)

        return self._record(a.value + b.value, needs, backward)

    def sub(self, a, b):
        return self.add(a, self.scale(b, -1.0))

    def mul(self, a, b):
        if a.value.shape != b.value.shape:
            raise ValueError(f"mul shape mismatch {a.value.shape} vs {b.value.shape}")
        needs = a.needs_grad or b.needs_grad

        def backward(dy):
            if a.needs_grad:
                _accumulate(a, dy * b.value)
            if b.needs_grad:
                _accumulate(b, dy * a.value)

        return self._record(a.value * b.value, needs, backward)

    # ---- reductions / layout ----

    def sum_axis(self, x, axis=1):
        y = x.value.sum(axis=axis, keepdims=True)
        return self._unary(x, y, lambda dy: np.broadcast_to(dy, x.value.shape))

    def mean(self, x):
        n = x.value.size
        y = np.float64(x.value.mean())
        return self._unary(x, y, lambda dy: np.full_like(x.value, dy / n))

    def total(self, x):
        y = np.float64(x.value.sum())
        return self._unary(x, y, lambda dy: np.full_like(x.value, dy))

    def concat(self, parts, axis=1):
        widths = [p.value.shape[axis] for p in parts]
        y = np.concatenate([p.value for p in parts], axis=axis)
        needs = any(p.needs_grad for p in parts)
        offsets = np.cumsum([0] + widths)

        def backward(dy):
            for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
                if p.needs_grad:
                    idx = [slice(None)] * dy.ndim
                    idx[axis] = slice(lo, hi)
                    _accumulate(p, dy[tuple(idx)])

        return self._record(y, needs, backward)

    def softmax(self, x):
        """Row-wise softmax over the last axis."""
        z = x.value - x.value.max(axis=-1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=-1, keepdims=True)

        def dfn(dy):
            dot = (dy * y).sum(axis=-1, keepdims=True)
            return y * (dy - dot)
        return self._unary(x, y, dfn)

    def straight_through(self, x):
        """One-hot of the row argmax forward; identity gradient backward."""
        idx = x.value.argmax(axis=-1)
        y = np.zeros_like(x.value)
        np.put_along_axis(y, idx[..., None], 1.0, axis=-1)
        return self._unary(x, y, lambda dy: dy)

    # ---- backward ----

    def backward(self, root, seed=None):
        """Propagate ``seed`` (default: ones) from ``root`` through the tape."""
        for params, version in self._param_sets.values():
            if params.version != version:
                raise StaleTapeError(
                    "parameters were updated after this tape was recorded")
        if seed is None:
            seed = np.ones_like(root.value)
        else:
            seed = np.asarray(seed, dtype=np.float64)
            if seed.shape != root.value.shape:
                raise ValueError(
                    f"seed shape {seed.shape} != output shape {root.value.shape}")
        root.grad = seed if root.grad is None else root.grad + seed
        for node in reversed(self.nodes):
            if node.grad is not None and node._backward is not None:
                node._backward(node.grad)

    def grad(self, node):
        return node.grad

    def param_grad(self, params, name, target=False):
        node = self._param_nodes.get((id(params), name, target))
        if node is None or node.grad is None:
            return None
        return node.grad

    def collect_grads(self, params, target=False):
        """name -> gradient for every recorded parameter of ``params``.

        Parameters that did not influence the seeded output get zeros, so the
        result always covers the optimiser's full view.
        """
        grads = {}
        store = params.target_entries if target else params.entries
        for (pid, name, tgt), node in self._param_nodes.items():
            if pid == id(params) and tgt == target:
                grads[name] = (node.grad if node.grad is not None
                               else np.zeros_like(store[name]))
        return grads
