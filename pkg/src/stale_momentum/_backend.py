"""Kernel backend selection.

The compiled extension is preferred when importable; setting the
environment variable ``STALE_MOMENTUM_PURE_PYTHON`` (to anything nonempty)
forces the numpy fallback.  Both backends are bit-identical, so the choice
affects speed only.
"""

from __future__ import annotations

import os

from . import _reference

try:
    from . import _kernels

    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False

_FORCE_PURE = bool(os.environ.get("STALE_MOMENTUM_PURE_PYTHON"))
USE_COMPILED = HAVE_COMPILED and not _FORCE_PURE


def active_backend() -> str:
    """Name of the backend in use: 'compiled' or 'python'."""
    return "compiled" if USE_COMPILED else "python"


def queue_race(work, offsets, total):
    if USE_COMPILED:
        return _kernels.queue_race(work, offsets, total)
    return _reference.queue_race(work, offsets, total)


def async_runs(lam, hessian, w_star, w0, alpha, mu_l, read_idx, noise, out):
    # The compiled kernel only covers diagonal hessians; dense objectives
    # always take the numpy path so results never depend on the backend.
    if USE_COMPILED and lam is not None:
        return _kernels.async_runs(lam, w_star, w0, alpha, mu_l, read_idx, noise, out)
    return _reference.async_runs(lam, hessian, w_star, w0, alpha, mu_l, read_idx, noise, out)
