"""Build script: compiles the fused numeric kernels when a toolchain is present.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any build failure here degrades to a warning.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "facmarl.diffcore._fastcore",
                ["src/facmarl/diffcore/_fastcore.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    sys.stderr.write(f"facmarl: skipping compiled kernels ({exc}); "
                     "falling back to NumPy backend\n")

setup(ext_modules=ext_modules)
