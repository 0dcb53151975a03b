"""Kernel backend selection.

The compiled extension is used when it built successfully; otherwise the
numpy implementation takes over transparently.  Set ``SEDKIT_PURE_PYTHON=1``
to force the fallback (useful for the kernel benchmark and for debugging).
"""

import os

from . import py_kernels

if os.environ.get("SEDKIT_PURE_PYTHON") == "1":
    _impl = py_kernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = py_kernels

BACKEND = "python" if _impl is py_kernels else "compiled"

joint_counts = _impl.joint_counts
em_estep = _impl.em_estep

__all__ = ["BACKEND", "joint_counts", "em_estep", "py_kernels"]
