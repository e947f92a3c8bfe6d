"""Backend selection for the permutation kernel.

The compiled extension (``sigaudit._native``) and the numpy fallback
implement the same counter-based construction and return bit-identical
results; the compiled one is used when importable unless
``SIGAUDIT_FORCE_FALLBACK`` is set to a non-empty value.
"""

from __future__ import annotations

import os

import numpy as np

from ._philox import max_stat_sample_numpy

try:
    from . import _native

    HAVE_NATIVE = True
except ImportError:  # pragma: no cover - build-environment dependent
    _native = None
    HAVE_NATIVE = False


def _use_native() -> bool:
    return HAVE_NATIVE and not os.environ.get("SIGAUDIT_FORCE_FALLBACK")


def backend_name() -> str:
    return "native" if _use_native() else "numpy"


def max_stat_sample(
    values: np.ndarray, permutations: int, seed: int, workers: int = 0
) -> np.ndarray:
    """Permutation sample of max(run sums) - min(run sums).

    ``workers`` is a thread-count hint for the compiled backend (0 = let
    OpenMP decide); it never affects the returned values.
    """
    if _use_native():
        x = np.ascontiguousarray(values, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise ValueError("need a 2-d matrix with at least 2 runs")
        if permutations < 1:
            raise ValueError("permutations must be >= 1")
        return _native.max_stat_sample(x, permutations, seed & ((1 << 64) - 1), workers)
    return max_stat_sample_numpy(values, permutations, seed)
