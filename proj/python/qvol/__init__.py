"""Convex-volume annealing estimator and quantum-walk statevector toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
