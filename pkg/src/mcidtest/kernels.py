"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; set
``MCIDTEST_PURE=1`` to force the numpy/Python fallback.
"""

import os

from . import _pycore

MODE_CUT = _pycore.MODE_CUT
MODE_EXPANSION = _pycore.MODE_EXPANSION
MODE_SIZE = _pycore.MODE_SIZE

if os.environ.get("MCIDTEST_PURE", "") not in ("", "0"):
    _impl = _pycore
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        _impl = _pycore

BACKEND = "compiled" if _impl is not _pycore else "python"

walk = _impl.walk
scan_samples = _impl.scan_samples
enum_subsets = _impl.enum_subsets
lex_smallest = _pycore.lex_smallest
