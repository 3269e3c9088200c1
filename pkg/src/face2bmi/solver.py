"""SMO backend selection: compiled core when present, NumPy otherwise.

The compiled extension is optional. It is used automatically whenever it
imported cleanly and the Gram matrix is dense; set F2B_SOLVER_BACKEND to
"python" or "compiled" to force a choice (benchmarks do this).
"""

from __future__ import annotations

import os

import numpy as np

from . import smo_python
from .errors import ValidationError
from .smo_python import SmoResult, dual_objective  # noqa: F401  (re-export)

try:
    from . import _smo
except ImportError:  # pragma: no cover - depends on the build
    _smo = None

BACKENDS = ("compiled", "python")


def compiled_available() -> bool:
    return _smo is not None


def default_backend() -> str:
    env = os.environ.get("F2B_SOLVER_BACKEND")
    if env:
        if env not in BACKENDS:
            raise ValidationError(
                f"F2B_SOLVER_BACKEND must be one of {BACKENDS}, got {env!r}"
            )
        if env == "compiled" and not compiled_available():
            raise ValidationError("compiled solver backend requested but not built")
        return env
    return "compiled" if compiled_available() else "python"


def solve(cache, y, c, epsilon, tol, max_iter, backend: str | None = None) -> SmoResult:
    """Run SMO against a kernel cache (dense or row-on-demand)."""
    name = backend or default_backend()
    if name not in BACKENDS:
        raise ValidationError(f"unknown solver backend {name!r}")
    y = np.ascontiguousarray(y, dtype=np.float64)
    if name == "compiled" and compiled_available() and cache.matrix is not None:
        alpha, alpha_star, bias, iterations, gap, converged = _smo.solve_dense(
            cache.matrix, y, float(c), float(epsilon), float(tol), int(max_iter)
        )
        return SmoResult(alpha, alpha_star, float(bias), int(iterations), float(gap), bool(converged))
    return smo_python.solve(
        cache.row, cache.diag, y, float(c), float(epsilon), float(tol), int(max_iter)
    )
