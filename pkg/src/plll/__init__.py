"""Partial LLL reduction, classic and effective LLL, and integer least squares."""

from .ils import IlsSolution, babai_point, solve_ils, sphere_decode
from .linalg import FlopCounter, qr_gso, qr_householder, qr_min_pivot, spectral_condition
from .reduction import (
    GrowthOverflowError,
    ReducedSystem,
    ReductionParams,
    SingularBasisError,
    reduce,
    reduce_elll,
    reduce_lll,
    reduce_plll,
)

__all__ = [
    "FlopCounter", "qr_gso", "qr_householder", "qr_min_pivot", "spectral_condition",
    "ReductionParams", "ReducedSystem", "reduce", "reduce_lll", "reduce_elll", "reduce_plll",
    "GrowthOverflowError", "SingularBasisError",
    "IlsSolution", "babai_point", "sphere_decode", "solve_ils",
]
