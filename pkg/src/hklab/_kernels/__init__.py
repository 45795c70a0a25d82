"""Bit-kernel backend selection.

The compiled extension is preferred when importable; otherwise the pure
fallback is used.  Set HKLAB_FORCE_PURE_KERNELS=1 to force the fallback
(used by the parity tests and the benchmark).
"""

import os

from . import _pure

if os.environ.get("HKLAB_FORCE_PURE_KERNELS"):
    _backend = _pure
else:
    try:
        from . import _core as _backend
    except ImportError:
        _backend = _pure

occupations = _backend.occupations
hopping_entries = _backend.hopping_entries


def backend_name():
    """Either "compiled" or "pure"."""
    return "compiled" if _backend.__name__.endswith("_core") else "pure"
