"""Select the compiled block scanners, or the numpy fallback.

Set ``SEQWEIGHT_PURE=1`` to force the fallback even when the extension is built.
"""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("SEQWEIGHT_PURE", "").strip() not in ("", "0"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _fallback
        BACKEND = "python"
    else:
        BACKEND = "cython"

fallback = _fallback
