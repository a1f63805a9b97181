"""Discrete pseudo-differential calculus on Z^n x T^n at finite-section scale."""

from .lattice import LatticeBox, LatticeFunction, MultiIndex, StencilError, forward_difference, schwartz_seminorm
from .fourier import ConfigurationError, TorusFunction, TorusGrid, dft, falling_derivative, idft
from .symbols import (Symbol, axis_shift, builtin, constant, discrete_laplacian, elliptic_demo, japanese_bracket,
                      perturbed, symbol_add, symbol_mul, trig_poly)
from .classes import check_ellipticity, estimate_seminorm
from .quantization import (FiniteSectionOperator, SobolevSpec, apply, finite_section, operator_norm_estimate,
                           sobolev_norm, weighted_adjoint)
from .calculus import adjoint_symbol, asymptotic_sum, compose_symbols, remainder_order_probe
from .parametrix import NotEllipticError, build_parametrix, elliptic_regularity_experiment
from .adjointness import (build_block, deficiency_probe, duality_check, ellipticity_of_PQplusI, symmetry_defect)
from .description import parse_symbol

__version__ = "0.1.0"
