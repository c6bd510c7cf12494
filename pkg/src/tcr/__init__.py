"""Temporal-calibrated robust training toolkit for noisy labels."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
