"""Theta lifts of vector-valued cusp forms to orthogonal groups of even lattices."""

__version__ = "0.1.0"
