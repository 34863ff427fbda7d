"""Identifiability of delay-Doppler systems from a single Gaussian probe."""
__version__ = "0.1.0"
