"""Numeric kernel dispatch: compiled extension when available, NumPy otherwise.

Set ``INSIGHTLOOP_PURE_KERNELS=1`` to force the pure backend (used by the
benchmark and the backend-agreement tests).
"""

from __future__ import annotations

import os

if os.environ.get("INSIGHTLOOP_PURE_KERNELS", "") in ("1", "true", "yes"):
    from insightloop.kernels._pure import BACKEND, acf_max, changepoint_scan, ols_line, pearson_r
else:
    try:
        from insightloop.kernels._native import (  # type: ignore[attr-defined]
            BACKEND,
            acf_max,
            changepoint_scan,
            ols_line,
            pearson_r,
        )
    except ImportError:
        from insightloop.kernels._pure import (
            BACKEND,
            acf_max,
            changepoint_scan,
            ols_line,
            pearson_r,
        )

__all__ = ["BACKEND", "acf_max", "changepoint_scan", "ols_line", "pearson_r"]
