"""Kernel selection: the compiled extension when importable, pure Python otherwise.

Set ``ACTGUARD_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("ACTGUARD_PURE_PYTHON") == "1":
        raise ImportError("pure Python kernels requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "compiled" if _ckernels is not None else "python"


def available() -> list[str]:
    return ["compiled", "python"] if _ckernels is not None else ["python"]


def kernels_for(name: str | None = None):
    if name is None:
        name = BACKEND
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built; reinstall the package")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
