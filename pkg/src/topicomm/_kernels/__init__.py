"""Backend selection for the hot merge loops.

The compiled extension is preferred when it imported cleanly; setting
``TOPICOMM_PURE_PYTHON=1`` forces the NumPy fallback (useful for
debugging and for benchmarking the two implementations against each
other).
"""

import os

from . import pure

BACKEND = "pure"
_impl = pure

if not os.environ.get("TOPICOMM_PURE_PYTHON"):
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        pass

semq_merge_loop = _impl.semq_merge_loop
modularity_merge_loop = _impl.modularity_merge_loop
