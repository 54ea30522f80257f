"""Dispersive estimates, limiting absorption and Birman-Schwinger analysis
for the discrete Schroedinger operator H = Delta + V on Z^d."""

from .bessel import bessel_j, bessel_j_table, eval_j
from .core.lattice import Box, LatticeSequence
from .propagator import apply_propagator, kernel_value
from .resolvent import Boundary, SpectralPoint, kernel_grid, r0_kernel, r0_split
from .schrodinger import (Hamiltonian, Potential, bs_operator, bs_scan, build_hamiltonian,
                          discrete_spectrum, factorize, spectrum)
from .verdict import VerdictRecord

__version__ = "0.1.0"

__all__ = ["bessel_j", "bessel_j_table", "eval_j", "Box", "LatticeSequence", "apply_propagator",
           "kernel_value", "Boundary", "SpectralPoint", "kernel_grid", "r0_kernel", "r0_split",
           "Hamiltonian", "Potential", "bs_operator", "bs_scan", "build_hamiltonian",
           "discrete_spectrum", "factorize", "spectrum", "VerdictRecord"]
