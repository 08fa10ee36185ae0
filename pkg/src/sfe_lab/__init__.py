"""Exact desk-scale analysis of two-party secure function evaluation in the random-oracle model."""

__version__ = "0.1.0"
