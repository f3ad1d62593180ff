"""Exact and numerical tools for hard Lefschetz questions on symplectic models."""

__version__ = "0.1.0"
