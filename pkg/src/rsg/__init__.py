"""Riemannian spline gait transitions for shape-space locomoting systems."""

__version__ = "0.1.0"
