"""Hilbert class polynomials from complex approximations of j at CM points."""

__version__ = "0.1.0"
