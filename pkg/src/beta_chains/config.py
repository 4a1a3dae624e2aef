"""Numerical tolerances, kept in one place so the CLI can override them."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass
class Tolerances:
    # relative residual allowed when evaluating a polynomial at a computed root
    eval_rel: float = 1e-9
    # imaginary parts below imag_rel * scale are treated as rounding noise
    imag_rel: float = 1e-7
    # roots closer than cluster_rel * scale count as one cluster (reporting only)
    cluster_rel: float = 1e-6
    # interlacing violations up to clamp_rel * scale are clamped away
    clamp_rel: float = 1e-9
    # default capacity of the stored alpha prefixes of a boundary point
    alpha_capacity: int = 64


TOL = Tolerances()


def set_tolerances(**overrides) -> Tolerances:
    """Override tolerance fields in place; unknown names raise ``KeyError``."""
    names = {f.name for f in fields(Tolerances)}
    for key, value in overrides.items():
        if key not in names:
            raise KeyError(f"unknown tolerance {key!r}")
        setattr(TOL, key, type(getattr(TOL, key))(value))
    return TOL


def reset_tolerances() -> Tolerances:
    for key, value in asdict(Tolerances()).items():
        setattr(TOL, key, value)
    return TOL
