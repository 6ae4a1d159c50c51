"""Hot assembly kernels with a compiled core and a numpy fallback.

The Cython extension is optional: if it is missing (or NDFEM_PURE_PYTHON
is set) the numpy implementations are used.  Both backends implement the
same three primitives and are compared in tests and in
benchmarks/bench_kernels.py.
"""

import os

from . import _numpy_impl

HAVE_COMPILED = False
_impl = _numpy_impl

if not os.environ.get("NDFEM_PURE_PYTHON"):
    try:
        from . import _core

        HAVE_COMPILED = True
        _impl = _core
    except ImportError:
        pass

BACKEND = "compiled" if HAVE_COMPILED else "numpy"


def basis_tab(exps, X, Y, inv, want_hess=True):
    return _impl.basis_tab(exps, X, Y, inv, want_hess)


def weighted_gram(F, G, w):
    return _impl.weighted_gram(F, G, w)


def weighted_vec(F, s, w):
    return _impl.weighted_vec(F, s, w)
