"""Rigorous semidefinite bounds for translation-invariant Lindblad
dynamics on the infinite 1D lattice."""

__version__ = "0.1.0"
