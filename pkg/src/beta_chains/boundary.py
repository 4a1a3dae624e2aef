"""Boundary points, Olshanski-Vershik statistics and the theta = infinity arrays.

A boundary point ``omega = (alpha_plus, alpha_minus, gamma1, gamma2)`` stores
finite nonincreasing prefixes of the two alpha sequences; the tails are zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial
from typing import List, Optional, Sequence

import numpy as np

from .config import TOL
from .errors import InsufficientData, InvalidInput, InvalidParameter, NotRealRooted
from .kernels import WeylPoint
from .polyroots import RealRootedPoly, derivative, hermite_zeros

__all__ = [
    "BOUNDARY_POINT_SCHEMA",
    "BoundaryPoint",
    "BoundaryPointPrime",
    "OVStats",
    "LimitEstimate",
    "ov_stats",
    "ov_limit_estimate",
    "construct_ov_sequence",
    "default_prefix",
    "theta_inf_coeffs",
    "theta_inf_poly",
    "theta_inf_row",
    "theta_inf_array",
    "power_sum_limits",
    "derivative_chain_defect",
]

BOUNDARY_POINT_SCHEMA = {
    "type": "object",
    "properties": {
        "alpha_plus": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "alpha_minus": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "gamma1": {"type": "number"},
        "gamma2": {"type": "number", "minimum": 0},
    },
    "required": ["alpha_plus", "alpha_minus", "gamma1", "gamma2"],
    "additionalProperties": False,
}


def _alpha_prefix(values, name: str) -> np.ndarray:
    a = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise InvalidParameter(f"{name} must be finite")
    if np.any(a < 0):
        raise InvalidParameter(f"{name} must be nonnegative")
    if np.any(np.diff(a) > 0):
        raise InvalidParameter(f"{name} must be nonincreasing")
    if a.size > TOL.alpha_capacity:
        raise InvalidParameter(f"{name} exceeds the stored capacity {TOL.alpha_capacity}")
    # trailing zeros carry no information
    nz = np.flatnonzero(a > 0)
    a = a[: nz[-1] + 1] if nz.size else a[:0]
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """``omega in Omega``: two alpha prefixes, a drift and a Gaussian part."""

    alpha_plus: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alpha_minus: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha_plus", _alpha_prefix(self.alpha_plus, "alpha_plus"))
        object.__setattr__(self, "alpha_minus", _alpha_prefix(self.alpha_minus, "alpha_minus"))
        g1, g2 = float(self.gamma1), float(self.gamma2)
        if not (np.isfinite(g1) and np.isfinite(g2)):
            raise InvalidParameter("gamma1 and gamma2 must be finite")
        if g2 < 0:
            raise InvalidParameter("gamma2 must be nonnegative")
        object.__setattr__(self, "gamma1", g1)
        object.__setattr__(self, "gamma2", g2)

    @property
    def alpha_sq_sum(self) -> float:
        return float(np.sum(self.alpha_plus**2) + np.sum(self.alpha_minus**2))

    @property
    def delta(self) -> float:
        return self.gamma2 + self.alpha_sq_sum

    @property
    def alpha_max(self) -> float:
        return float(max(self.alpha_plus[:1].sum(), self.alpha_minus[:1].sum()))

    def to_prime(self) -> "BoundaryPointPrime":
        return BoundaryPointPrime(self.alpha_plus, self.alpha_minus, self.gamma1, self.delta)

    def alpha(self, sign: str, i: int) -> float:
        """``alpha^{sign}_i`` with 1-based ``i``; zero beyond the stored prefix."""
        a = self.alpha_plus if sign == "+" else self.alpha_minus
        return float(a[i - 1]) if i <= a.size else 0.0

    def distance(self, other: "BoundaryPoint", r: Optional[int] = None) -> float:
        """Max per-parameter deviation over the first ``r`` alphas and both gammas."""
        if r is None:
            r = max(self.alpha_plus.size, self.alpha_minus.size, other.alpha_plus.size, other.alpha_minus.size, 1)
        d = [abs(self.gamma1 - other.gamma1), abs(self.gamma2 - other.gamma2)]
        for i in range(1, r + 1):
            d.append(abs(self.alpha("+", i) - other.alpha("+", i)))
            d.append(abs(self.alpha("-", i) - other.alpha("-", i)))
        return float(max(d))

    def to_dict(self) -> dict:
        return {
            "alpha_plus": self.alpha_plus.tolist(),
            "alpha_minus": self.alpha_minus.tolist(),
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryPoint":
        import jsonschema

        try:
            jsonschema.validate(data, BOUNDARY_POINT_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise InvalidInput(f"invalid boundary point: {exc.message}") from exc
        return cls(data["alpha_plus"], data["alpha_minus"], data["gamma1"], data["gamma2"])

    @classmethod
    def from_json(cls, text: str) -> "BoundaryPoint":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BoundaryPoint)
            and np.array_equal(self.alpha_plus, other.alpha_plus)
            and np.array_equal(self.alpha_minus, other.alpha_minus)
            and self.gamma1 == other.gamma1
            and self.gamma2 == other.gamma2
        )

    def __repr__(self) -> str:
        return (
            f"BoundaryPoint(alpha_plus={self.alpha_plus.tolist()}, alpha_minus={self.alpha_minus.tolist()}, "
            f"gamma1={self.gamma1}, gamma2={self.gamma2})"
        )


@dataclass(frozen=True, eq=False)
class BoundaryPointPrime:
    """The same point described by ``delta = gamma2 + sum alpha^2``."""

    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    gamma1: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha_plus", _alpha_prefix(self.alpha_plus, "alpha_plus"))
        object.__setattr__(self, "alpha_minus", _alpha_prefix(self.alpha_minus, "alpha_minus"))
        object.__setattr__(self, "gamma1", float(self.gamma1))
        object.__setattr__(self, "delta", float(self.delta))
        sq = float(np.sum(self.alpha_plus**2) + np.sum(self.alpha_minus**2))
        if self.delta < sq - 1e-12 * max(1.0, sq):
            raise InvalidParameter("delta must dominate the sum of squared alphas")

    def to_omega(self) -> BoundaryPoint:
        sq = float(np.sum(self.alpha_plus**2) + np.sum(self.alpha_minus**2))
        return BoundaryPoint(self.alpha_plus, self.alpha_minus, self.gamma1, max(self.delta - sq, 0.0))


@dataclass(frozen=True)
class OVStats:
    """Rescaled statistics of one row ``a`` at level ``N``."""

    level: int
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    gamma1: float
    delta: float
    power_sums: np.ndarray  # S_1..S_Pmax


def _row_points(row) -> np.ndarray:
    return row.points if isinstance(row, WeylPoint) else WeylPoint(row).points


def ov_stats(row, P_max: int = 2) -> OVStats:
    if P_max < 2:
        raise InvalidInput("P_max must be >= 2")
    a = _row_points(row)
    N = a.size
    x = a / N
    ap = np.maximum(x, 0.0)
    am = np.maximum(-x[::-1], 0.0)
    S = np.array([np.sum(x**p) for p in range(1, P_max + 1)])
    return OVStats(N, ap, am, float(S[0]), float(np.sum(x * x)), S)


@dataclass
class LimitEstimate:
    """Estimated boundary point plus the evidence behind it."""

    omega: BoundaryPoint
    levels: List[int]
    # per-parameter max successive change over the last half of the levels
    diagnostics: dict
    # raw per-level statistics, same keys as diagnostics
    trajectory: dict


def _extrapolate(levels: np.ndarray, values: np.ndarray) -> float:
    # fit v(N) = c0 + c1 N^{-1/2} + c2 N^{-1} and report c0
    X = np.column_stack([np.ones_like(levels), levels**-0.5, 1.0 / levels])
    coef, *_ = np.linalg.lstsq(X, values, rcond=None)
    return float(coef[0])


def ov_limit_estimate(rows: Sequence, r: int = 4, extrapolate: bool = True) -> LimitEstimate:
    """Estimate the O-V limit point of rows observed at increasing levels.

    Statistics at each level are the rescaled extreme points, the mean and the
    second moment. With ``extrapolate`` the value at infinite level is read off
    a fit in powers ``N^{-1/2}`` and ``N^{-1}``, which removes the finite-size
    drift of the bulk edge; otherwise the largest level is used as is.
    """
    rows = [(_row_points(x)) for x in rows]
    if len(rows) < 3:
        raise InsufficientData("need at least 3 rows")
    order = np.argsort([x.size for x in rows], kind="stable")
    rows = [rows[i] for i in order]
    levels = np.array([x.size for x in rows], dtype=float)
    if np.any(np.diff(levels) <= 0):
        raise InvalidInput("rows must have distinct levels")
    stats = [ov_stats(x, 2) for x in rows]
    traj = {"gamma1": np.array([s.gamma1 for s in stats]), "delta": np.array([s.delta for s in stats])}
    for i in range(1, r + 1):
        traj[f"alpha_plus_{i}"] = np.array([s.alpha_plus[i - 1] if i <= s.level else 0.0 for s in stats])
        traj[f"alpha_minus_{i}"] = np.array([s.alpha_minus[i - 1] if i <= s.level else 0.0 for s in stats])
    half = max(2, (len(rows) + 1) // 2)
    diag = {k: float(np.max(np.abs(np.diff(v[-half:])))) for k, v in traj.items()}
    if extrapolate:
        est = {k: _extrapolate(levels, v) for k, v in traj.items()}
    else:
        est = {k: float(v[-1]) for k, v in traj.items()}
    ap = np.maximum([est[f"alpha_plus_{i}"] for i in range(1, r + 1)], 0.0)
    am = np.maximum([est[f"alpha_minus_{i}"] for i in range(1, r + 1)], 0.0)
    # extrapolation may break monotonicity slightly; restore it
    ap = np.minimum.accumulate(ap)
    am = np.minimum.accumulate(am)
    g2 = max(est["delta"] - float(np.sum(ap**2) + np.sum(am**2)), 0.0)
    omega = BoundaryPoint(ap, am, est["gamma1"], g2)
    return LimitEstimate(omega, [int(n) for n in levels], diag, {k: v.tolist() for k, v in traj.items()})


def default_prefix(N: int) -> int:
    """Number of alphas placed explicitly at level ``N``: ``floor(N^{1/10})``."""
    k = int(np.floor(N ** 0.1))
    while (k + 1) ** 10 <= N:
        k += 1
    while k**10 > N:
        k -= 1
    return k


def construct_ov_sequence(omega: BoundaryPoint, N: int, prefix: Optional[int] = None) -> WeylPoint:
    """A level-``N`` row whose O-V statistics approach ``omega``.

    The first ``prefix`` alphas of each sign are placed at ``N alpha^+_i`` and
    ``-N alpha^-_i``; the other points sit at two levels ``c -/+ sqrt(gamma2 N)``
    in (almost) equal numbers, with the common shift ``c`` chosen so that the
    row mean equals ``N gamma1`` exactly.
    """
    N = int(N)
    if N < 1:
        raise InvalidParameter("N must be positive")
    if prefix is None:
        prefix = default_prefix(N)
    kp = min(int(prefix), omega.alpha_plus.size)
    km = min(int(prefix), omega.alpha_minus.size)
    placed = np.concatenate([N * omega.alpha_plus[:kp], -N * omega.alpha_minus[:km]])
    M = N - placed.size
    if M < 1:
        raise InvalidParameter(f"level {N} is too small to place {placed.size} alphas and a bulk")
    lower = M // 2
    upper = M - lower
    spread = np.sqrt(omega.gamma2 * N)
    c = (N * omega.gamma1 - placed.sum() - (upper - lower) * spread) / M
    bulk = np.concatenate([np.full(upper, c + spread), np.full(lower, c - spread)])
    return WeylPoint.from_unsorted(np.concatenate([placed, bulk]))


def power_sum_limits(omega: BoundaryPoint, P_max: int) -> np.ndarray:
    """Limits ``s_1..s_P`` of the power sums of ``a^{(N)}/N``."""
    if P_max < 1:
        raise InvalidInput("P_max must be >= 1")
    s = np.zeros(P_max)
    s[0] = omega.gamma1
    if P_max >= 2:
        s[1] = omega.delta
    for p in range(3, P_max + 1):
        s[p - 1] = np.sum(omega.alpha_plus**p) + (-1) ** p * np.sum(omega.alpha_minus**p)
    return s


def theta_inf_coeffs(omega: BoundaryPoint, J: int, method: str = "product") -> np.ndarray:
    """Taylor coefficients ``c_1..c_J`` of the generating series at theta = infinity.

    The series is ``exp(-g z - gamma2 z^2/2) prod(1 - alpha^+ z) prod(1 + alpha^- z)``
    with ``g = gamma1 - sum alpha^+ + sum alpha^-``. The default ``"product"``
    method expands the exponential by its first-order recurrence and
    multiplies in the finite alpha polynomial. ``"log"`` exponentiates the
    log-series ``-gamma1 z - gamma2 z^2/2 - sum_k s_k z^k/k`` instead; it
    loses relative accuracy for large ``J`` and is kept as a cross-check.
    """
    J = int(J)
    if J < 1:
        raise InvalidInput("J must be >= 1")
    if method == "log":
        s = power_sum_limits(omega, max(J, 2))
        logc = np.zeros(J + 1)
        logc[1] = -omega.gamma1
        for k in range(2, J + 1):
            logc[k] = -(s[k - 1] if k >= 3 else omega.alpha_sq_sum) / k
        if J >= 2:
            logc[2] -= omega.gamma2 / 2.0
        c = np.zeros(J + 1)
        c[0] = 1.0
        for j in range(1, J + 1):
            k = np.arange(1, j + 1)
            c[j] = np.sum(k * logc[k] * c[j - k]) / j
        return c[1:]
    if method != "product":
        raise InvalidInput(f"unknown method {method!r}")
    g = omega.gamma1 - float(np.sum(omega.alpha_plus)) + float(np.sum(omega.alpha_minus))
    # e(z) = exp(a z + b z^2) solves e' = (a + 2 b z) e
    a, b = -g, -omega.gamma2 / 2.0
    e = np.zeros(J + 1)
    e[0] = 1.0
    for j in range(J):
        e[j + 1] = (a * e[j] + (2.0 * b * e[j - 1] if j >= 1 else 0.0)) / (j + 1)
    poly = np.ones(1)  # ascending powers
    for x in omega.alpha_plus:
        poly = np.convolve(poly, [1.0, -x])
    for x in omega.alpha_minus:
        poly = np.convolve(poly, [1.0, x])
    return np.convolve(e, poly)[1: J + 1]


def theta_inf_poly(omega: BoundaryPoint, N: int) -> RealRootedPoly:
    """``z^N + sum_j c_j N!/(N-j)! z^{N-j}`` as a monic polynomial (coefficients only)."""
    c = theta_inf_coeffs(omega, N)
    coeffs = np.ones(N + 1)
    for j in range(1, N + 1):
        coeffs[j] = c[j - 1] * factorial(N) / factorial(N - j)
    return RealRootedPoly(coeffs)


def _rank_one_update(r: np.ndarray, rho: float) -> np.ndarray:
    """Eigenvalues of ``diag(r) + rho * 1 1^T``, nonincreasing.

    Exactly repeated entries of ``r`` are deflated first: all but one copy
    stay put, the remaining copy carries weight ``sqrt(multiplicity)``.
    """
    vals, counts = np.unique(r, return_counts=True)
    stay = np.repeat(vals, counts - 1)
    w = np.sqrt(counts.astype(float))
    if vals.size == 1:
        moved = vals + rho * counts
    else:
        moved = np.linalg.eigvalsh(np.diag(vals) + rho * np.outer(w, w))
    return np.sort(np.concatenate([stay, moved]))[::-1]


def theta_inf_row(omega: BoundaryPoint, N: int) -> WeylPoint:
    """Row ``N`` of the deterministic theta = infinity array.

    The row polynomial is ``prod_k (1 - alpha^+_k D)(1 + alpha^-_k D)`` applied
    to a shifted, scaled Hermite polynomial, where ``D = d/dz``. Each factor
    ``(1 -/+ a D)`` moves the roots to the eigenvalues of ``diag(r) +/- a 1 1^T``,
    so the whole row comes from symmetric eigenproblems and is real by
    construction.
    """
    N = int(N)
    if N < 1:
        raise InvalidInput("N must be >= 1")
    shift = omega.gamma1 - float(np.sum(omega.alpha_plus)) + float(np.sum(omega.alpha_minus))
    if omega.gamma2 > 0:
        r = shift + np.sqrt(omega.gamma2) * hermite_zeros(N)
    else:
        r = np.full(N, shift)
    for a in omega.alpha_plus:
        r = _rank_one_update(r, float(a))
    for a in omega.alpha_minus:
        r = _rank_one_update(r, -float(a))
    return WeylPoint(r)


def theta_inf_array(omega: BoundaryPoint, N: int, check: bool = True):
    """All rows ``1..N`` of the theta = infinity array for ``omega``.

    With ``check`` every row up to level 60 is substituted into its
    coefficient-form polynomial; a relative residual above ``1e-8`` of the
    evaluation scale raises :class:`NotRealRooted` naming the level.
    """
    from .orbital import InterlacingArray

    rows = [theta_inf_row(omega, i) for i in range(1, int(N) + 1)]
    if check:
        for i, row in enumerate(rows[:60], start=1):
            c = theta_inf_poly(omega, i).coeffs
            x = row.points
            resid = np.abs(np.polyval(c, x))
            scale = np.polyval(np.abs(c), np.abs(x))
            if np.any(resid > 1e-8 * (1.0 + scale)):
                raise NotRealRooted(f"level {i}: row is not a root set of its polynomial")
    return InterlacingArray(rows)


def derivative_chain_defect(omega: BoundaryPoint, N: int) -> float:
    """Max coefficient gap between the monic derivative of row ``i+1`` and row ``i``."""
    worst = 0.0
    for i in range(1, int(N)):
        d = derivative(theta_inf_poly(omega, i + 1), normalize_monic=True).coeffs
        p = theta_inf_poly(omega, i).coeffs
        worst = max(worst, float(np.max(np.abs(d - p) / np.maximum(1.0, np.abs(p)))))
    return worst
