"""Dense-tensor math with reverse-mode differentiation.

Values are C-contiguous float64 NumPy arrays throughout.  The hot kernels
(affine layers, per-sample mixing matmuls, Adam) run on a compiled extension
when available and on a NumPy fallback otherwise; ``BACKEND_NAME`` says which
one was selected at import.
"""

from .backend import BACKEND_NAME, get_kernels
from .gradcheck import finite_diff_grad, max_relative_error
from .graph import Graph, Node, StaleTapeError
from .nn import (MLPSpec, ParamSet, Tape, backward, build_into, build_network,
                 forward, mlp_apply, mlp_infer)
from .optim import (AdamState, adam_init, adam_step, clip_grads, hard_update,
                    soft_update)

__all__ = [
    "BACKEND_NAME", "get_kernels",
    "Graph", "Node", "StaleTapeError",
    "MLPSpec", "ParamSet", "Tape",
    "build_network", "build_into", "forward", "backward",
    "mlp_apply", "mlp_infer",
    "AdamState", "adam_init", "adam_step", "clip_grads",
    "soft_update", "hard_update",
    "finite_diff_grad", "max_relative_error",
]
