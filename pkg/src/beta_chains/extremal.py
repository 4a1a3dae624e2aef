"""Law of one diagonal entry under an extremal consistent distribution.

For finite theta the entry is a Gaussian with mean ``gamma1`` and variance
``gamma2/theta`` plus independent centered gammas, one per alpha.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Optional

import numpy as np

from .boundary import BoundaryPoint
from .errors import InvalidInput, InvalidParameter
from .kernels import ThetaParam, as_theta
from .stats import empirical_charfn

__all__ = [
    "TAIL_POLICIES",
    "ExtremalDiagonalLaw",
    "char_fn",
    "centered_gamma_sample",
    "extremal_diag_sample",
    "cumulant",
    "empirical_charfn_distance",
]

TAIL_POLICIES = ("drop", "gaussian_compensate")


@dataclass(frozen=True)
class ExtremalDiagonalLaw:
    """``omega``, ``theta`` and how many gamma terms are sampled explicitly.

    ``K`` defaults to the longest stored alpha prefix, which makes the sampler
    exact. A smaller ``K`` drops the remaining gamma terms; with
    ``tail_policy="gaussian_compensate"`` their variance is moved into the
    Gaussian part (higher cumulants of the tail are then lost).
    """

    omega: BoundaryPoint
    theta: ThetaParam
    K: Optional[int] = None
    tail_policy: str = "gaussian_compensate"

    def __post_init__(self):
        object.__setattr__(self, "theta", as_theta(self.theta))
        if self.tail_policy not in TAIL_POLICIES:
            raise InvalidParameter(f"tail_policy must be one of {TAIL_POLICIES}")
        full = max(self.omega.alpha_plus.size, self.omega.alpha_minus.size)
        K = full if self.K is None else int(self.K)
        if K < 0:
            raise InvalidParameter("K must be nonnegative")
        object.__setattr__(self, "K", K)

    @property
    def strip_halfwidth(self) -> float:
        """Half-width of the strip where the char function is holomorphic."""
        if self.theta.is_infinite:
            return np.inf
        m = self.omega.alpha_max
        return np.inf if m == 0 else self.theta.finite() / m

    @property
    def tail_variance(self) -> float:
        if self.theta.is_infinite:
            return 0.0
        ap, am = self.omega.alpha_plus[self.K:], self.omega.alpha_minus[self.K:]
        return float(np.sum(ap**2) + np.sum(am**2)) / self.theta.finite()


def char_fn(omega: BoundaryPoint, theta, x):
    """``F_{omega,theta}(x)`` for real ``x`` (scalar or array).

    Each gamma factor is evaluated as its own principal complex logarithm;
    ``1 -/+ i alpha x / theta`` has real part 1, so no branch issue arises.
    """
    theta = as_theta(theta)
    x = np.asarray(x, dtype=float)
    if theta.is_infinite:
        return np.exp(1j * omega.gamma1 * x)
    th = theta.finite()
    logF = 1j * omega.gamma1 * x - omega.gamma2 * x**2 / (2.0 * th)
    for a in omega.alpha_plus:
        logF = logF - 1j * a * x - th * np.log(1.0 - 1j * a * x / th)
    for a in omega.alpha_minus:
        logF = logF + 1j * a * x - th * np.log(1.0 + 1j * a * x / th)
    return np.exp(logF)


def centered_gamma_sample(theta: float, eta: float, rng: np.random.Generator, size=None):
    """``G - theta/eta`` with ``G ~ Gamma(shape theta, rate eta)``."""
    theta, eta = float(theta), float(eta)
    if not (theta > 0 and eta > 0):
        raise InvalidParameter("theta and eta must be positive")
    return rng.standard_gamma(theta, size) / eta - theta / eta


def extremal_diag_sample(law: ExtremalDiagonalLaw, rng: Optional[np.random.Generator], size=None):
    """Draws of one diagonal entry under ``M^theta_omega``."""
    om = law.omega
    if law.theta.is_infinite:
        return om.gamma1 if size is None else np.full(int(size), om.gamma1)
    if rng is None:
        raise InvalidInput("a finite theta needs an rng")
    th = law.theta.finite()
    var = om.gamma2 / th
    if law.tail_policy == "gaussian_compensate":
        var += law.tail_variance
    shape = () if size is None else (int(size),)
    out = np.full(shape, om.gamma1, dtype=float)
    if var > 0:
        out = out + np.sqrt(var) * rng.standard_normal(shape)
    for a in om.alpha_plus[: law.K]:
        out = out + centered_gamma_sample(th, th / a, rng, shape)
    for a in om.alpha_minus[: law.K]:
        out = out - centered_gamma_sample(th, th / a, rng, shape)
    return float(out) if size is None else out


def cumulant(omega: BoundaryPoint, theta: float, p: int) -> float:
    """Cumulant of order ``p`` of the diagonal-entry law.

    ``kappa_1 = gamma1``, ``kappa_2 = delta/theta`` and, for ``p >= 3``,
    ``(p-1)! theta^{1-p} (sum (alpha^+)^p + (-1)^p sum (alpha^-)^p)``; the
    alternating sign on the negative side is what the log-expansion of the
    char function gives.
    """
    th = as_theta(theta).finite()
    p = int(p)
    if p < 1:
        raise InvalidInput("p must be >= 1")
    if p == 1:
        return omega.gamma1
    if p == 2:
        return omega.delta / th
    s = float(np.sum(omega.alpha_plus**p) + (-1) ** p * np.sum(omega.alpha_minus**p))
    return factorial(p - 1) * th ** (1 - p) * s


def empirical_charfn_distance(samples, omega: BoundaryPoint, theta, grid) -> float:
    """``max_x |mean(exp(i x s)) - F(x)|`` over ``grid``."""
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise InvalidInput("grid is empty")
    ecf = empirical_charfn(samples, grid)
    return float(np.max(np.abs(ecf - char_fn(omega, theta, grid))))
