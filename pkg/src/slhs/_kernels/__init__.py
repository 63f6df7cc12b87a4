"""Hot kernels with a compiled core and a numpy fallback.

The compiled extension ``_ckernels`` is used when it was built and
``SLHS_PURE_PYTHON`` is unset; otherwise ``_pykernels`` provides the same
functions. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels

if os.environ.get("SLHS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

ALIGNED, SWAPPED, COMBINED = 0, 1, 2

gellmann_hermitian = _impl.gellmann_hermitian
expi_hermitian = _impl.expi_hermitian
unitary_from_params = _impl.unitary_from_params
transform = _impl.transform
inequality_lhs = _impl.inequality_lhs
measure_sum = _impl.measure_sum
search_lhs = _impl.search_lhs
search_measure = _impl.search_measure


def compiled_available():
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return False
    return True
