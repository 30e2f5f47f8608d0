"""Coupled uncertainty analysis for variable-stiffness composite plates."""

__version__ = "0.1.0"

from .families import CopulaFamily, MarginalFamily  # noqa: F401
from .copulas import BivariateCopula  # noqa: F401
