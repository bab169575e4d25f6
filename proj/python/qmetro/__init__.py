"""Squeezed-light interferometry: Fock-space oracle and Gaussian moment engine."""

from ._core import *  # noqa: F401,F403
from ._core import TruncationError, SingularOperatingPoint, cli  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
