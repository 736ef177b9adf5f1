"""Kernel backend selected at import time.

The compiled module is used when it was built and ``HDIVTEST_PURE_PYTHON``
is unset; otherwise the numpy fallback is used. ``BACKEND`` names the one
in effect.
"""
import os

import numpy as np

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"

if not os.environ.get("HDIVTEST_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass


def available_backends():
    """Map backend name to module for every backend importable here."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def pair_sums(P, e):
    return _impl.pair_sums(
        np.ascontiguousarray(P, dtype=float), np.ascontiguousarray(e, dtype=float)
    )


def column_scores(Z, e):
    return _impl.column_scores(
        np.ascontiguousarray(Z, dtype=float), np.ascontiguousarray(e, dtype=float)
    )
