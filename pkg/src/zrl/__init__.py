"""Desk-scale numerical laboratory for large values of |zeta(sigma+it)|."""

__version__ = "0.1.0"
