"""Spectral toolkit for derivative nonlinear Schrodinger equations on a periodic box."""
from .decomp import DecompositionBank
from .grid import ContractError, FrequencyGrid, SpectralField, gaussian_packet, random_band_limited
from .nonlinearity import PolynomialNonlinearity
from .propagator import Propagator, TimeGrid, duhamel, free_evolve
from .solver import extract_scattering_state, picard_solve, small_data_global_run, split_step_evolve

__version__ = "0.1.0"
