"""Kernel selection: compiled extension if available, pure Python otherwise.

Set ``SEQALLOC_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the kernel-equivalence tests).
"""

import os

from . import _alloc_py

if os.environ.get("SEQALLOC_PURE_PYTHON"):
    allocate = _alloc_py.allocate
    BACKEND = "python"
else:
    try:
        from ._alloc_cy import allocate

        BACKEND = "cython"
    except ImportError:
        allocate = _alloc_py.allocate
        BACKEND = "python"
