"""Dixon-Anderson kernels, orbital beta processes and their boundary.

Common entry points are re-exported here; the bessel, ensembles, extremal,
stats and cli modules are imported directly.
"""
from __future__ import annotations

from .boundary import BoundaryPoint, construct_ov_sequence, ov_limit_estimate, ov_stats, theta_inf_array
from .config import TOL, reset_tolerances, set_tolerances
from .errors import (
    BetaChainsError,
    ChainQualityWarning,
    DegenerateArguments,
    DegenerateTopRow,
    InsufficientData,
    InvalidInput,
    InvalidParameter,
    KernelNumericalFailure,
    NotRealRooted,
)
from .kernels import WeylPoint, dixon_anderson_log_density, dixon_anderson_sample
from .orbital import InterlacingArray, orbital_sample
from .polyroots import RealRootedPoly, real_roots

__version__ = "0.1.0"

__all__ = [
    "BoundaryPoint",
    "construct_ov_sequence",
    "ov_limit_estimate",
    "ov_stats",
    "theta_inf_array",
    "TOL",
    "reset_tolerances",
    "set_tolerances",
    "BetaChainsError",
    "ChainQualityWarning",
    "DegenerateArguments",
    "DegenerateTopRow",
    "InsufficientData",
    "InvalidInput",
    "InvalidParameter",
    "KernelNumericalFailure",
    "NotRealRooted",
    "WeylPoint",
    "dixon_anderson_log_density",
    "dixon_anderson_sample",
    "InterlacingArray",
    "orbital_sample",
    "RealRootedPoly",
    "real_roots",
]
