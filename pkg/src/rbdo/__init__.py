"""Reliability-based design optimisation with the directional bat algorithm."""

__version__ = "0.1.0"
