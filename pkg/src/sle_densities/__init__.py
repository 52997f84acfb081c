"""Anchored-cluster densities and SLE observables in the upper half-plane,
with an independent BPZ ODE engine and lattice Monte Carlo validation."""

__version__ = "0.1.0"
