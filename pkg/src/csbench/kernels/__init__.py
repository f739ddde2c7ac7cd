"""Solver inner-loop kernels with a compiled fast path.

The compiled extension (``_core``, built from Cython at install time) is
preferred when importable; otherwise the pure-Python reference
(``pyref``) serves. ``BACKEND`` names the active choice. Both implement
the identical algorithm and are pinned together by the parity tests, so
which one runs is a speed question, not a results question. There is
deliberately no environment switch between them: numeric output must
never depend on environment variables.
"""

from . import pyref
from .pyref import (
    IHT_CONVERGED,
    IHT_MAX_ITERATIONS,
    IHT_STEP_BREAKDOWN,
    OMP_RANK_DEFICIENT,
    OMP_STALLED,
    OMP_TARGET_REACHED,
    OMP_TOL_STOP,
    hard_threshold,
)

try:
    from . import _core as _impl
    BACKEND = "cython"
except ImportError:
    _impl = pyref
    BACKEND = "python"

omp_kernel = _impl.omp_kernel
iht_kernel = _impl.iht_kernel
hard_threshold = _impl.hard_threshold

__all__ = [
    "BACKEND",
    "IHT_CONVERGED",
    "IHT_MAX_ITERATIONS",
    "IHT_STEP_BREAKDOWN",
    "OMP_RANK_DEFICIENT",
    "OMP_STALLED",
    "OMP_TARGET_REACHED",
    "OMP_TOL_STOP",
    "hard_threshold",
    "iht_kernel",
    "omp_kernel",
    "pyref",
]
