"""Kernel backend selection.

The compiled ``_kernels`` extension is preferred; the pure-Python module is
used when it is missing or when ``SPARSESHARE_PURE`` is set to a non-empty
value other than ``0``.
"""

import os

from . import _pykernels

_force_pure = os.environ.get("SPARSESHARE_PURE", "") not in ("", "0")

if _force_pure:
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _pykernels

BACKEND = "python" if kernels is _pykernels else "compiled"
