"""Backend selection for the quadrature kernels.

The compiled extension is used when it imports; setting
``STAIRCASE_BACKEND=python`` forces the numpy fallback.  Extended precision is
only provided by the compiled extension.
"""

from __future__ import annotations

import os

from staircase.sc import _kernels_py


class ExtendedPrecisionUnavailable(RuntimeError):
    pass


def _load():
    if os.environ.get("STAIRCASE_BACKEND", "").lower() == "python":
        return _kernels_py, "python"
    try:
        from staircase.sc import _ckernels
    except ImportError:
        return _kernels_py, "python"
    return _ckernels, "cython"


backend, BACKEND_NAME = _load()
python_backend = _kernels_py


def has_extended() -> bool:
    return bool(getattr(backend, "has_extended", False))


def integrate(eL, eR, A, B, sgn, rel, abs_tol, max_intervals, max_depth):
    return backend.integrate(eL, eR, A, B, sgn, rel, abs_tol, max_intervals, max_depth)


def integrate_dd(eL, eR, A, Alo, B, Blo, sgn, rel, abs_tol, max_intervals, max_depth):
    if not has_extended():
        raise ExtendedPrecisionUnavailable(
            "extended precision needs the compiled kernels (build with Cython, unset STAIRCASE_BACKEND)"
        )
    return backend.integrate_dd(eL, eR, A, Alo, B, Blo, sgn, rel, abs_tol, max_intervals, max_depth)
