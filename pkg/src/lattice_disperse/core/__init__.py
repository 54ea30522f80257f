"""Lattice sequences, quadrature, linear algebra and discrete inequalities."""

from .lattice import (Box, LatticeSequence, as_lattice_vector, convolve, norm,
                      rho_weight, rho_weights)
from .quadrature import QuadratureResult, integrate

__all__ = ["Box", "LatticeSequence", "as_lattice_vector", "convolve", "norm",
           "rho_weight", "rho_weights", "QuadratureResult", "integrate"]
