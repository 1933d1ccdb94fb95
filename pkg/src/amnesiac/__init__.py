"""Simulation and verification harness for amnesiac flooding."""

__version__ = "0.1.0"
