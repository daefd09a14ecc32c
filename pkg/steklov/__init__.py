"""Boundary integral operators, Poincare-Steklov maps and large-mass spectral studies
for the three-dimensional Dirac operator with MIT bag boundary conditions."""

__version__ = "1.0.0"
