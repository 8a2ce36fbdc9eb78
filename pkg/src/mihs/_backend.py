"""Pick the compiled kernels when importable, else the NumPy fallback.

Set ``MIHS_PURE_PYTHON=1`` to force the fallback (used by the benchmark and the
cross-backend tests).
"""
import os

from mihs import _fallback

STATUS_CONVERGED = _fallback.STATUS_CONVERGED
STATUS_MAX_ITER = _fallback.STATUS_MAX_ITER
STATUS_BREAKDOWN = _fallback.STATUS_BREAKDOWN

compiled = None
if os.environ.get("MIHS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from mihs import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

HAVE_COMPILED = compiled is not None
BACKEND = "cython" if HAVE_COMPILED else "numpy"


def get(name, backend=None):
    """Return kernel ``name`` from ``backend`` ('cython', 'numpy' or None=default)."""
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return getattr(compiled, name)
    if backend == "numpy":
        return getattr(_fallback, name)
    raise ValueError(f"unknown backend {backend!r}")
