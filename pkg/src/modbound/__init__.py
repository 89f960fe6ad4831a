"""Responsivity bounds for two-mode optical modulators."""
__version__ = "0.1.0"
