"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so any failure to build it is downgraded to a warning.
Set NDFEM_NO_EXT=1 to skip the extension entirely.
"""

import os
import warnings

from setuptools import setup

ext_modules = []
if not os.environ.get("NDFEM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ndfem._kernels._core",
                    ["src/ndfem/_kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # no compiler / no Cython: pure-python install
        warnings.warn(f"ndfem: skipping compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
