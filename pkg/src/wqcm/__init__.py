"""Numerical verification of weak (quasi-)contact metric structures on
explicit coordinate charts."""

__version__ = "0.1.0"
