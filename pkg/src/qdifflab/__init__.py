"""Numerical toolkit for q-quadratic differentials and q-stability data."""

__version__ = "0.1.0"
