"""Backend selection for the monomial-sum kernels.

The compiled extension is used when importable; setting the environment
variable ``POLYPL_PURE_PYTHON=1`` forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels_ext
except ImportError:  # extension not built
    _kernels_ext = None


def available_backends() -> dict:
    out = {"python": _kernels_py}
    if _kernels_ext is not None:
        out["compiled"] = _kernels_ext
    return out


if _kernels_ext is not None and not os.environ.get("POLYPL_PURE_PYTHON"):
    BACKEND = "compiled"
    _impl = _kernels_ext
else:
    BACKEND = "python"
    _impl = _kernels_py

rates = _impl.rates
rates_and_dlog = _impl.rates_and_dlog
