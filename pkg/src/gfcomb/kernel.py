"""Selects the propagation kernel at import time.

The compiled ``_kernel`` extension is used when it was built; otherwise the
numpy implementation in ``_kernel_py`` is used. Setting the environment
variable ``GFCOMB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from gfcomb import _kernel_py


def _load_compiled():
    try:
        from gfcomb import _kernel
    except ImportError:
        return None
    return _kernel


_compiled = None if os.environ.get("GFCOMB_PURE_PYTHON") else _load_compiled()

if _compiled is not None:
    propagate = _compiled.propagate
    BACKEND = "cython"
else:
    propagate = _kernel_py.propagate
    BACKEND = "python"


def get_propagate(backend):
    """Return the kernel for ``backend`` ('cython' or 'python')."""
    if backend == "python":
        return _kernel_py.propagate
    if backend == "cython":
        mod = _load_compiled()
        if mod is None:
            raise ImportError("compiled kernel gfcomb._kernel is not built")
        return mod.propagate
    raise ValueError(f"unknown backend {backend!r}")
