"""Limit shadows and darkness points of free group automorphisms."""

__version__ = "0.1.0"
