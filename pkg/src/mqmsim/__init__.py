"""Conditional-state preparation, light-off evolution and sub-Heisenberg
time-dependent homodyne verification of a measured mechanical mode."""

from .params import NoiseBudget, DerivedScales, derive

__all__ = ["NoiseBudget", "DerivedScales", "derive"]
__version__ = "0.1.0"
