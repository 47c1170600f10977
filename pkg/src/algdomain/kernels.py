"""Backend selection for the numeric hot loops.

The compiled extension is used when it imports; setting ``ALGDOMAIN_PURE=1``
forces the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as python_backend

try:
    if os.environ.get("ALGDOMAIN_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _ckernels as _active
except ImportError:
    _active = python_backend

BACKEND: str = _active.BACKEND
prepare = _active.prepare
eval2 = _active.eval2
eval2_points = _active.eval2_points
enclose2 = _active.enclose2
project = _active.project
column_runs = _active.column_runs


def compiled_backend():
    """Return the compiled module, or None when it is not built."""
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels
