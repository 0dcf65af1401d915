"""Isotropy-constant toolkit for convex bodies."""
__version__ = "0.1.0"
