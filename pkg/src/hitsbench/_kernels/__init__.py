"""Backend selection for the PPM context-model kernel.

The compiled Cython kernel is preferred when built; the pure-Python twin is
the fallback. Set HITSBENCH_PPM_BACKEND=python to force the fallback. Orders
above 7 always use the Python implementation (the compiled kernel packs the
context into a 64-bit key).
"""

from __future__ import annotations

import os

from ._ppm_py import ContextModel as PyContextModel

if os.environ.get("HITSBENCH_PPM_BACKEND") == "python":
    BACKEND = "python"
    _CyContextModel = None
else:
    try:
        from ._ppm_cy import ContextModel as _CyContextModel

        BACKEND = "cython"
    except ImportError:
        BACKEND = "python"
        _CyContextModel = None


def make_context_model(text: bytes, order: int):
    if _CyContextModel is not None and order <= 7:
        return _CyContextModel(text, order)
    return PyContextModel(text, order)
