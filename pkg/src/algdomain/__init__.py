"""Refined algebraic domains bounded by plane real algebraic curves."""

from .polynomials import Box, Poly1, Poly2, RootInterval

__all__ = ["Box", "Poly1", "Poly2", "RootInterval"]
__version__ = "0.1.0"
