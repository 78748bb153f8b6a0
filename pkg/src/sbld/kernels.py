"""Kernel backend selection.

The compiled extension is used when it imports; setting ``SBLD_PURE_PYTHON=1``
forces the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("SBLD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.BACKEND
hac_sorted = _impl.hac_sorted
cluster_sorted = _impl.cluster_sorted
uncorrected_std = _impl.uncorrected_std


def available_backends() -> dict:
    backends = {"python": _pykernels}
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        backends["cython"] = _ckernels
    return backends
