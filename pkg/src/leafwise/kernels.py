"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
module takes over. Set LEAFWISE_PURE_PYTHON=1 to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("LEAFWISE_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def backend_module(name=None):
    """Return the kernel module for ``name`` ('cython', 'python') or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def _c(a):
    return np.ascontiguousarray(a, dtype=float)


def reaction(u, beta, p1, p2, p3):
    """f(u, x) = beta u + p1/u - p2/u^3 + p3 u^3 on flat arrays."""
    return _impl.reaction(_c(u), _c(beta), _c(p1), _c(p2), _c(p3))


def reaction_du(u, beta, p1, p2, p3):
    """Pointwise derivative of the reaction term in u."""
    return _impl.reaction_du(_c(u), _c(beta), _c(p1), _c(p2), _c(p3))


def rhs(u, beta, p1, p2, p3, shape, spacing):
    """Laplacian plus reaction for a flattened field on a periodic grid."""
    if len(shape) == 1:
        return _impl.rhs_1d(_c(u), _c(beta), _c(p1), _c(p2), _c(p3), 1.0 / spacing[0] ** 2)
    nx, ny = shape
    return _impl.rhs_2d(_c(u), _c(beta), _c(p1), _c(p2), _c(p3), nx, ny,
                        1.0 / spacing[0] ** 2, 1.0 / spacing[1] ** 2)


def ode_dopri(b, p1, p2, p3, y0, t_end, rtol=1e-10, atol=1e-12, t_eval=None,
              y_low=1e-8, y_high=1e6, max_steps=1_000_000):
    return _impl.ode_dopri(float(b), float(p1), float(p2), float(p3), float(y0),
                           float(t_end), float(rtol), float(atol), t_eval,
                           float(y_low), float(y_high), int(max_steps))
