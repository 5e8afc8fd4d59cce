"""Symbolic classification of third-order ODEs y''' = F(x, y, y', y'')
up to contact, point, and fibre-preserving transformations, with the
induced conformal / Einstein-Weyl geometry and Chazy-class recognition."""

__version__ = "0.1.0"
