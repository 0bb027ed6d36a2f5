"""Dissipative stabilization of N-qubit W states: construction, simulation and analysis."""

__version__ = "0.1.0"
