"""Selects the coordinate-descent backend at import time.

The compiled extension is used when built; otherwise (or when the
PERFMODEL_PURE_PY environment variable is set) the NumPy fallback runs.
Both expose the same `sweep` contract and agree to float rounding.
"""

from __future__ import annotations

import os

if os.environ.get("PERFMODEL_PURE_PY"):
    from . import _cd_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _cdkernel as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _cd_py as _impl

        BACKEND = "python"

sweep = _impl.sweep
