"""Kernel backend selection.

The compiled extension (``_native``, built from Cython) is preferred;
if it is missing or ``SAROPT_PURE_PYTHON=1`` is set, the pure-numpy
fallback is used.  ``BACKEND`` records which one won so benchmarks and
bug reports can tell them apart.
"""

import os

if os.environ.get("SAROPT_PURE_PYTHON", "") == "1":
    from . import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _native as _impl
        BACKEND = "native"
    except ImportError:
        from . import _fallback as _impl
        BACKEND = "python"

im2col = _impl.im2col
col2im = _impl.col2im

__all__ = ["im2col", "col2im", "BACKEND"]
