"""Diagonally inhomogeneous colored q-Hahn vertex model and Beta polymer toolkit."""

__version__ = "0.1.0"
