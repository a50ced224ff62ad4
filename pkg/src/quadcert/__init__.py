"""Exact arithmetic and certificates for quadratic forms over real quadratic fields."""

__version__ = "0.1.0"
