"""Numerical ranges and product numerical ranges of tensor-product operators."""

__version__ = "0.1.0"
