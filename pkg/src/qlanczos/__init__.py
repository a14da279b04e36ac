"""Quantum Lanczos with real-time evolution for shell-model Hamiltonians."""

__version__ = "0.1.0"
