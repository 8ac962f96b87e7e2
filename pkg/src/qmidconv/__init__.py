"""Exact and numeric tools for q-middle convolution of linear q-difference systems."""

__version__ = "0.1.0"
