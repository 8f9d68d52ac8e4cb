"""Hot numeric kernels with a compiled fast path.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
pure-Python ``_pykernels`` module is used. Setting ``PHICOV_PURE_PYTHON=1``
forces the fallback. ``BACKEND`` names the active implementation.
"""

import os

from phicov.kernels import _pykernels

if os.environ.get("PHICOV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from phicov.kernels import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
pb_convolve = _impl.pb_convolve
multilinear = _impl.multilinear
coverage_value = _impl.coverage_value
poisson_expectation = _impl.poisson_expectation


def available_backends():
    """Map backend name -> module for every importable implementation."""
    out = {"python": _pykernels}
    try:
        from phicov.kernels import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
