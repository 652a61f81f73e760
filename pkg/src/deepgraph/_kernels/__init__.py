"""Hot numerical kernels.

The compiled ``_native`` extension is used when it was built; otherwise the
numpy implementations in ``_fallback`` are bound. Set ``DEEPGRAPH_PURE_PYTHON=1``
to force the fallback.
"""
import os

from . import _fallback

fallback = _fallback

if os.environ.get("DEEPGRAPH_PURE_PYTHON", "") not in ("", "0"):
    native = None
else:
    try:
        from . import _native as native
    except ImportError:
        native = None

_impl = native if native is not None else _fallback
BACKEND = "native" if native is not None else "python"

eigh_ql = _impl.eigh_ql
histogram_counts = _impl.histogram_counts
quad_census = _impl.quad_census
adam_update = _impl.adam_update

__all__ = ["BACKEND", "eigh_ql", "histogram_counts", "quad_census", "adam_update", "native", "fallback"]
