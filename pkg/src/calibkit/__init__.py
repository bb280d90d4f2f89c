"""Exact and numerical verification of calibration geometry on flat models."""

__version__ = "0.1.0"
