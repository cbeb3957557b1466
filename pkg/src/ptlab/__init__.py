"""Numerical toolkit for PT-symmetric quantum mechanics."""

__version__ = "0.1.0"
