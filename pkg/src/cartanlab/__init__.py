"""Exact and numerical tools for higher-rank abelian actions on tori."""

__version__ = "0.1.0"
