"""Aharonov-Bohm phase simulator built on coherent-state effective potentials."""

__version__ = "0.1.0"
