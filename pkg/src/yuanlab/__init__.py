"""Exponent-one Galois extensions of finite local algebras, computed exactly."""

__version__ = "0.1.0"
