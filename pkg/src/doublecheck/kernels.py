"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
fallback. Set ``DOUBLECHECK_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on build
    _compiled = None

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

if _compiled is not None and not os.environ.get("DOUBLECHECK_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active one)."""
    if name is None:
        return _impl
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def lstm_forward(xw, w_hh, h0, c0, backend=None):
    return get_backend(backend).lstm_forward(_c(xw), _c(w_hh), _c(h0), _c(c0))


def lstm_backward(dhs, acts, cs, hs, h0, c0, w_hh, backend=None):
    return get_backend(backend).lstm_backward(_c(dhs), _c(acts), _c(cs), _c(hs), _c(h0), _c(c0), _c(w_hh))


def gaussian_forward(x, lengths, weights, backend=None):
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    return get_backend(backend).gaussian_forward(_c(x), lengths, _c(weights))


def gaussian_backward(dy, lengths, weights, backend=None):
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    return get_backend(backend).gaussian_backward(_c(dy), lengths, _c(weights))
