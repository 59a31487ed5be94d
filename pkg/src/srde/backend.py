"""Hot-kernel backend selection.

The compiled extension (``srde._core``, Cython) is preferred; the numpy
implementation (``srde._kernels_py``) is the fallback.  Selection happens
once at import and can be forced with the environment variable
``SRDE_BACKEND=compiled`` or ``SRDE_BACKEND=python``.

Both backends are deterministic run-to-run for fixed inputs.  The compiled
one additionally fixes the floating-point summation order independently of
any BLAS threading, which is what the byte-identical-output guarantee of
the CLI rests on.
"""

from __future__ import annotations

import os

_requested = os.environ.get("SRDE_BACKEND", "").strip().lower()

if _requested in ("", "compiled"):
    try:
        from . import _core as kernels  # type: ignore[attr-defined]

        BACKEND_NAME = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as kernels

        BACKEND_NAME = "python"
elif _requested in ("python", "numpy"):
    from . import _kernels_py as kernels

    BACKEND_NAME = "python"
else:
    raise ImportError(f"unknown SRDE_BACKEND value {_requested!r}")

__all__ = ["kernels", "BACKEND_NAME"]
