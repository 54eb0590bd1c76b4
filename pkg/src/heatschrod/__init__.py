"""Schrodingerisation circuits and verification tools for the heat equation."""
__version__ = "0.1.0"
