"""Fault-tolerant quantum error correction with Steane's 7-qubit code."""

__version__ = "0.1.0"
