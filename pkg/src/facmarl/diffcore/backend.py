"""Kernel backend selection.

At import time the compiled extension is preferred when it is present; the
NumPy implementation is the fallback.  ``FACMARL_BACKEND`` forces a choice
(``cython`` | ``numpy``), which the kernel parity tests and the benchmark use.
"""

import os

from . import _numpy_kernels

_FORCED = os.environ.get("FACMARL_BACKEND", "auto").lower()

if _FORCED == "numpy":
    kernels = _numpy_kernels
elif _FORCED == "cython":
    from . import _fastcore as kernels  # hard error if not built: user asked for it
else:
    try:
        from . import _fastcore as kernels
    except ImportError:
        kernels = _numpy_kernels

BACKEND_NAME = kernels.BACKEND_NAME

ACT_CODES = {
    "identity": _numpy_kernels.ACT_IDENTITY,
    "relu": _numpy_kernels.ACT_RELU,
    "tanh": _numpy_kernels.ACT_TANH,
    "elu": _numpy_kernels.ACT_ELU,
}


def get_kernels(name: str = "active"):
    """Return a kernel module by name ('active', 'numpy' or 'cython')."""
    if name == "active":
        return kernels
    if name == "numpy":
        return _numpy_kernels
    if name == "cython":
        from . import _fastcore
        return _fastcore
    raise ValueError(f"unknown backend {name!r}")
