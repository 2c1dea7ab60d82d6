"""Lowsnr Capacity - on-off signalling capacity of the non-coherent Rayleigh channel at low SNR."""

__version__ = "1.0.0"

from .analysis import CapacityPoint, capacity_bounds, capacity_low_snr, capacity_numeric_max
from .channel import OnOffInput, mi_closed, mi_quadrature
from .errors import BoundaryMaximumError, BracketError, CapacityError, ConvergenceError, DomainError
from .solver import low_snr_constants, maximize_mi, solve_x1
from .specfun import BranchK, lambert_w

__all__ = [
    "BoundaryMaximumError",
    "BracketError",
    "BranchK",
    "CapacityError",
    "CapacityPoint",
    "ConvergenceError",
    "DomainError",
    "OnOffInput",
    "capacity_bounds",
    "capacity_low_snr",
    "capacity_numeric_max",
    "lambert_w",
    "low_snr_constants",
    "maximize_mi",
    "mi_closed",
    "mi_quadrature",
    "solve_x1",
]
