"""Backend selection for the hot kernels.

The compiled extension is used when present; otherwise the NumPy fallback.
Set TVPOMDP_BACKEND=python or TVPOMDP_BACKEND=compiled to force a choice
(forcing `compiled` raises if the extension is missing).
"""

from __future__ import annotations

import os

_choice = os.environ.get("TVPOMDP_BACKEND", "auto").strip().lower()

if _choice in ("python", "py", "numpy"):
    from . import _kernels_py as _impl
elif _choice in ("compiled", "c", "ext"):
    from . import _kernels_c as _impl  # type: ignore[attr-defined]
elif _choice in ("auto", ""):
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl
else:
    raise RuntimeError(f"unknown TVPOMDP_BACKEND value {_choice!r}")

backend_name: str = _impl.BACKEND
value_iteration = _impl.value_iteration
belief_predict = _impl.belief_predict

__all__ = ["backend_name", "value_iteration", "belief_predict"]
