"""Backend selection for the hot evaluation kernel.

The compiled ``_kernels_c`` extension is used when it imports; otherwise, or
when ``STEERKIT_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the numpy implementation is used. Both return identical results to ~1e-12.
"""

import os

from . import _kernels_py
from ._kernels_py import pair_bloch, single_bloch, triad_batch  # noqa: F401

_force_py = os.environ.get("STEERKIT_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    BACKEND = "python"
    lhs_batch = _kernels_py.lhs_batch
else:
    try:
        from ._kernels_c import lhs_batch  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        BACKEND = "python"
        lhs_batch = _kernels_py.lhs_batch


def backends():
    """Mapping of available backend name -> ``lhs_batch`` callable."""
    out = {"python": _kernels_py.lhs_batch}
    try:
        from ._kernels_c import lhs_batch as c_lhs

        out["cython"] = c_lhs
    except ImportError:
        pass
    return out
