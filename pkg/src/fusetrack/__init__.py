"""Correlation-filter tracker with multi-resolution confidence fusion."""

__version__ = "0.1.0"
