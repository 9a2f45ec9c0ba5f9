"""Finite-dimensional spin geometry, determinant-line sign calculus,
spectral flow and orientation transport, validated on Fourier-truncated
flat-torus model operators."""

__version__ = "0.1.0"

from . import clifford3, detsign, specflow, orient, torus_model, swlocal  # noqa: E402,F401

__all__ = [
    "clifford3",
    "detsign",
    "specflow",
    "orient",
    "torus_model",
    "swlocal",
    "__version__",
]
