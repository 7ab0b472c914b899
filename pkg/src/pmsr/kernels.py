"""Kernel backend selection.

Imports the compiled extension (``pmsr._kernels``) when it is available
and falls back to the pure-Python twin otherwise.  Set ``PMSR_PURE_PY=1``
to force the fallback, e.g. for benchmarking or debugging.  ``BACKEND``
names the active implementation.
"""

from __future__ import annotations

import os

if os.environ.get("PMSR_PURE_PY"):
    from pmsr import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from pmsr import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from pmsr import _kernels_py as _impl

        BACKEND = "python"

mat_mul = _impl.mat_mul
mat_add = _impl.mat_add
mat_sub = _impl.mat_sub
mod_inv = _impl.mod_inv
gauss_jordan = _impl.gauss_jordan
