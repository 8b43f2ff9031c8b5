"""Finite-dimensional index theory for Rabinowitz-Floer homology."""

__version__ = "0.1.0"
