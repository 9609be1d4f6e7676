"""Arbitrary-scale super-resolution with dual pixel/texture reconstruction branches."""

__version__ = "0.1.0"
