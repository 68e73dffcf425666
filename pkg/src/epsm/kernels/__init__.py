"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``EPSM_DISABLE_NUMBA`` is set to a non-empty value other than
``0``. ``BACKEND`` reports which one is active. The wrappers below coerce
inputs to contiguous float64 arrays so both backends see the same dtypes.
"""
import os

import numpy as np

from . import _numpy

_disabled = os.environ.get("EPSM_DISABLE_NUMBA", "") not in ("", "0")

if _disabled:
    _impl = _numpy
else:
    try:
        from . import _numba as _impl
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _numpy

BACKEND = "numpy" if _impl is _numpy else "numba"


def _pts(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64).reshape(-1, 2))


def encounter_batch(dp, dv, radius_sum):
    """Constant-velocity disk encounters for many relative states at once.

    Returns ``(ttc, ttce, d_ttce, closing)``; ``ttc`` is NaN where no contact
    is predicted and ``closing`` marks pairs whose separation is shrinking.
    """
    dp, dv = _pts(dp), _pts(dv)
    r = np.ascontiguousarray(np.broadcast_to(np.asarray(radius_sum, np.float64), dp.shape[:1]))
    return _impl.encounter_batch(dp, dv, r)


def project_to_polyline(points, poly):
    """Return ``(distance, signed_offset, station)`` of points against a polyline.

    ``signed_offset`` is positive to the left of the travel direction.
    """
    return _impl.project_to_polyline(_pts(points), _pts(poly))


def nearest_distance(a, b):
    """Distance from every point of ``a`` to its nearest point in ``b``."""
    return _impl.nearest_distance(_pts(a), _pts(b))


def convex_intersection_area(P, Q):
    return float(_impl.convex_intersection_area(_pts(P), _pts(Q)))
