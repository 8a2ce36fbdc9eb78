"""Momentum Iterative Hessian Sketch solvers for l2-regularized least squares."""
from mihs._backend import BACKEND, HAVE_COMPILED

__version__ = "0.1.0"

__all__ = ["BACKEND", "HAVE_COMPILED", "__version__"]
