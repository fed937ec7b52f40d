"""Exact and Monte Carlo computations for genus-0 hyperbolic surfaces with a
distinguished cusp, organised around their decorated plane-tree spines."""

__version__ = "0.1.0"
