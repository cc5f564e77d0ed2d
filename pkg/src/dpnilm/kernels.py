"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled backend is picked automatically when the extension built;
set ``DPNILM_PURE_PYTHON=1`` to force the pure-Python kernels (used by the
benchmark and the backend-equivalence tests).
"""

import os

from . import _kernels_py

if os.environ.get("DPNILM_PURE_PYTHON") == "1":
    _backend = _kernels_py
else:
    try:
        from . import _kernels as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = _kernels_py

BACKEND = _backend.BACKEND_NAME

solve_fractions = _backend.solve_fractions
multi_shot_run = _backend.multi_shot_run
one_shot_trial = _backend.one_shot_trial
