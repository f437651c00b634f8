"""Pick the kernel implementation at import time.

``MINT_EVAL_BACKEND=python`` forces the NumPy fallback; ``=compiled`` makes a
missing extension an error. Anything else (or unset) prefers the compiled
kernels when they import.
"""

import os

from . import _kernels_py

_choice = os.environ.get("MINT_EVAL_BACKEND", "auto").lower()

kernels = _kernels_py
name = "python"

if _choice != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        if _choice == "compiled":
            raise
    else:
        kernels = _compiled
        name = "compiled"


def get(backend: str | None = None):
    """Return a kernel module: ``None`` for the import-time choice, or ``"python"``/``"compiled"``."""
    if backend is None:
        return kernels
    if backend == "python":
        return _kernels_py
    if backend == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")


def compiled_available() -> bool:
    try:
        from . import _kernels
    except ImportError:
        return False
    return _kernels is not None
