"""Magnetic trajectories on Berger spheres (left-invariant Sasakian SU(2))."""
from .errors import BergerError, ContractError, DegenerateError, DomainError, PoleError
from .sasaki import SasakiParams, params_from_alpha, params_from_c

__version__ = "0.1.0"

__all__ = [
    "BergerError",
    "ContractError",
    "DegenerateError",
    "DomainError",
    "PoleError",
    "SasakiParams",
    "params_from_alpha",
    "params_from_c",
]
