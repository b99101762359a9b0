"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set FLEXSCATTER_PURE_PYTHON=1 to force the fallback (used by the benchmark and
by tests that compare the two implementations).
"""

import os

if os.environ.get("FLEXSCATTER_PURE_PYTHON"):
    from .python_ref import run_bp

    BACKEND = "python"
else:
    try:
        from ._bp import run_bp  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from .python_ref import run_bp

        BACKEND = "python"

__all__ = ["run_bp", "BACKEND"]
