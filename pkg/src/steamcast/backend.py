"""Kernel backend selection.

The compiled Cython kernels are used when the extension built; the
numpy fallback is always available.  Set STEAMCAST_BACKEND=python or
STEAMCAST_BACKEND=compiled to force a choice (the latter raises if
the extension is missing).
"""
from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("STEAMCAST_BACKEND", "").lower()

if _forced == "python":
    kernels = _kernels_py
elif _forced == "compiled":
    from . import _kernels_cy as kernels  # noqa: F401
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    return "compiled" if kernels.COMPILED else "python"
