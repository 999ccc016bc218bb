"""Backend selection for the Monte Carlo kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Setting ``CONDLAB_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
sphere_power_stats = _pykernels.sphere_power_stats
gaussian_power_stats = _pykernels.gaussian_power_stats

if not os.environ.get("CONDLAB_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        sphere_power_stats = _ckernels.sphere_power_stats
        gaussian_power_stats = _ckernels.gaussian_power_stats


def backend_functions(name: str):
    """Return ``(sphere_power_stats, gaussian_power_stats)`` for a named backend."""
    if name == "python":
        return _pykernels.sphere_power_stats, _pykernels.gaussian_power_stats
    if name == "cython":
        from . import _ckernels

        return _ckernels.sphere_power_stats, _ckernels.gaussian_power_stats
    raise ValueError(f"unknown kernel backend {name!r}")


def merge_stats(a, b):
    """Combine two ``(count, mean, m2)`` triples (Chan et al. pairwise update)."""
    na, ma, sa = a
    nb, mb, sb = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = mb - ma
    mean = ma + delta * nb / n
    m2 = sa + sb + delta * delta * na * nb / n
    return n, mean, m2
