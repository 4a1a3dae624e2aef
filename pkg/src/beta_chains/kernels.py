"""Dixon-Anderson Markov kernels between consecutive Weyl-chamber levels.

Given ``b`` at level ``N+1`` and Dirichlet weights ``alpha``, the next row is the
root set of ``sum_j alpha_j prod_{k != j} (z - b_k)``. These roots are exactly
the eigenvalues of ``diag(b)`` compressed to the hyperplane orthogonal to
``sqrt(alpha)``, which is how they are computed here: a symmetric eigenproblem
is always real-rooted and interlaces ``b`` by Cauchy's theorem, so no complex
root clean-up is needed. The companion-matrix route is kept as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
from scipy.special import gammaln

from .config import TOL
from .errors import (
    DegenerateTopRow,
    InvalidInput,
    InvalidParameter,
    KernelNumericalFailure,
    NotRealRooted,
)
from .polyroots import RealRootedPoly, real_roots

__all__ = [
    "INFINITY",
    "ThetaParam",
    "WeylPoint",
    "as_theta",
    "log_gamma_sample",
    "dirichlet_sample",
    "dixon_anderson_sample",
    "dixon_anderson_sample_batch",
    "dixon_anderson_log_density",
    "lambda_compose_sample",
    "rejection_sample_level2",
]

INFINITY = "inf"


@dataclass(frozen=True)
class ThetaParam:
    """``theta = beta/2``: a finite positive real or :data:`INFINITY`."""

    value: Union[float, str]

    def __post_init__(self):
        v = self.value
        if isinstance(v, str):
            if v.lower() not in ("inf", "infinity", "∞"):
                raise InvalidParameter(f"unknown theta {v!r}")
            object.__setattr__(self, "value", INFINITY)
            return
        v = float(v)
        if math.isinf(v) and v > 0:
            object.__setattr__(self, "value", INFINITY)
            return
        if not (v > 0 and math.isfinite(v)):
            raise InvalidParameter(f"theta must be positive, got {v}")
        object.__setattr__(self, "value", v)

    @property
    def is_infinite(self) -> bool:
        return self.value == INFINITY

    def finite(self) -> float:
        if self.is_infinite:
            raise InvalidParameter("a finite theta is required here")
        return float(self.value)

    def __str__(self) -> str:
        return "inf" if self.is_infinite else repr(self.value)


def as_theta(theta) -> ThetaParam:
    return theta if isinstance(theta, ThetaParam) else ThetaParam(theta)


@dataclass(frozen=True, eq=False)
class WeylPoint:
    """Nonincreasing finite tuple ``a_1 >= ... >= a_N``."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1).copy()
        if p.size < 1:
            raise InvalidInput("a Weyl point needs at least one coordinate")
        if not np.all(np.isfinite(p)):
            raise InvalidInput("Weyl point coordinates must be finite")
        if np.any(np.diff(p) > 0):
            raise InvalidInput("Weyl point coordinates must be nonincreasing")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @classmethod
    def from_unsorted(cls, values) -> "WeylPoint":
        return cls(np.sort(np.asarray(values, dtype=float).reshape(-1))[::-1])

    @property
    def level(self) -> int:
        return self.points.size

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylPoint) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())

    def __repr__(self) -> str:
        return f"WeylPoint({self.points.tolist()})"

    def interlaces(self, upper: "WeylPoint") -> bool:
        """``self ≺ upper``: ``upper_1 >= self_1 >= upper_2 >= ...``."""
        a, b = self.points, upper.points
        if b.size != a.size + 1:
            return False
        return bool(np.all(b[:-1] >= a) and np.all(a >= b[1:]))


def _as_points(b) -> np.ndarray:
    if isinstance(b, WeylPoint):
        return b.points
    return WeylPoint(b).points


def log_gamma_sample(shape: float, size, rng: np.random.Generator) -> np.ndarray:
    """Logarithms of Gamma(shape, 1) draws.

    Marsaglia-Tsang (numpy's ``standard_gamma``) for shape >= 1; below 1 the
    boost ``G_shape = G_{shape+1} * U^{1/shape}`` is applied in log space so
    that tiny draws for small shapes never underflow to zero.
    """
    shape = float(shape)
    if not shape > 0:
        raise InvalidParameter(f"gamma shape must be positive, got {shape}")
    if shape >= 1.0:
        return np.log(rng.standard_gamma(shape, size))
    g = rng.standard_gamma(shape + 1.0, size)
    u = rng.random(size)
    return np.log(g) + np.log1p(-u) / shape


def dirichlet_sample(n: int, theta: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Symmetric Dirichlet(theta, ..., theta) vectors of length ``n``.

    Normalized gamma draws, formed as a softmax of log-gammas. Returns shape
    ``(n,)`` when ``size`` is None, else ``(size, n)``.
    """
    n = int(n)
    if n < 1:
        raise InvalidParameter("Dirichlet dimension must be >= 1")
    theta = float(theta)
    if not (theta > 0 and math.isfinite(theta)):
        raise InvalidParameter(f"Dirichlet parameter must be positive and finite, got {theta}")
    shape = (n,) if size is None else (int(size), n)
    if n == 1:
        return np.ones(shape)
    lg = log_gamma_sample(theta, shape, rng)
    lg -= lg.max(axis=-1, keepdims=True)
    w = np.exp(lg)
    return w / w.sum(axis=-1, keepdims=True)


def _compress(b: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Eigenvalues of diag(b) on the complement of sqrt(alpha), batched.

    ``b`` and ``alpha`` have shape ``(B, N+1)``; output is ``(B, N)`` in
    nonincreasing order.
    """
    B, n1 = b.shape
    if n1 == 2:
        # closed form avoids any rounding: a = alpha_2 b_1 + alpha_1 b_2
        return (alpha[:, 1] * b[:, 0] + alpha[:, 0] * b[:, 1])[:, None]
    u = np.sqrt(alpha)
    # reflect sqrt(alpha) onto -e_1; w = u + e_1 is well conditioned since u_1 >= 0
    w = u.copy()
    w[:, 0] += 1.0
    ww = np.einsum("bi,bi->b", w, w)
    Dw = b * w
    wDw = np.einsum("bi,bi->b", w, Dw)
    M = -(2.0 / ww)[:, None, None] * (w[:, :, None] * Dw[:, None, :] + Dw[:, :, None] * w[:, None, :])
    M += (4.0 * wDw / ww**2)[:, None, None] * (w[:, :, None] * w[:, None, :])
    idx = np.arange(n1)
    M[:, idx, idx] += b
    ev = np.linalg.eigvalsh(M[:, 1:, 1:])
    return ev[:, ::-1]


def _companion_roots(b: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    out = np.empty((b.shape[0], b.shape[1] - 1))
    for i in range(b.shape[0]):
        c = np.zeros(b.shape[1])
        for j in range(b.shape[1]):
            c += alpha[i, j] * np.poly(np.delete(b[i], j))
        try:
            out[i] = real_roots(RealRootedPoly(c / c[0]))
        except NotRealRooted as exc:
            raise KernelNumericalFailure(str(exc)) from exc
    return out


def _restore_interlacing(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    hi = b[:, :-1]
    lo = b[:, 1:]
    scale = np.maximum(1.0, np.max(np.abs(b), axis=1, keepdims=True))
    viol = np.maximum(a - hi, lo - a) / scale
    worst = float(np.max(viol)) if viol.size else 0.0
    if worst > TOL.clamp_rel:
        raise KernelNumericalFailure(f"interlacing violated by {worst:.3g} (relative) after root finding")
    return np.clip(a, lo, hi)


def dixon_anderson_sample_batch(b, theta, rng: np.random.Generator, method: str = "eig") -> np.ndarray:
    """One kernel step for a batch of rows ``b`` of shape ``(B, N+1)``.

    Each row gets its own Dirichlet weights. Returns ``(B, N)``, each output
    row nonincreasing and interlacing its parent.
    """
    theta = as_theta(theta)
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[1] < 2:
        raise InvalidInput("batch input must have shape (B, N+1) with N >= 1")
    if not np.all(np.isfinite(b)):
        raise InvalidInput("rows must be finite")
    if np.any(np.diff(b, axis=1) > 0):
        raise InvalidInput("rows must be nonincreasing")
    B, n1 = b.shape
    if theta.is_infinite:
        alpha = np.full((B, n1), 1.0 / n1)
    else:
        alpha = dirichlet_sample(n1, theta.finite(), rng, size=B)
    if method == "eig":
        a = _compress(b, alpha)
    elif method == "companion":
        a = _companion_roots(b, alpha)
    else:
        raise InvalidInput(f"unknown method {method!r}")
    return _restore_interlacing(a, b)


def dixon_anderson_sample(b, theta, rng: Optional[np.random.Generator] = None, method: str = "eig") -> WeylPoint:
    """Sample ``a ~ Lambda(b, .)`` at level ``N = len(b) - 1``."""
    pts = _as_points(b)
    if pts.size < 2:
        raise InvalidInput("the kernel needs a top row of level >= 2")
    theta = as_theta(theta)
    if rng is None and not theta.is_infinite:
        raise InvalidInput("a finite theta needs an rng")
    return WeylPoint(dixon_anderson_sample_batch(pts[None, :], theta, rng, method)[0])


def dixon_anderson_log_density(b, a, theta: float) -> np.ndarray:
    """Log of the explicit kernel density of ``a`` given ``b``.

    ``a`` may be a single row of length ``N`` or an array ``(..., N)``.
    Points outside the strict interlacing region, or with tied entries, get
    ``-inf``.
    """
    bb = _as_points(b)
    theta = as_theta(theta).finite()
    if np.any(np.diff(bb) >= 0):
        raise DegenerateTopRow("the explicit density needs strictly decreasing b")
    a = np.asarray(a, dtype=float)
    N = bb.size - 1
    if a.shape[-1] != N:
        raise InvalidInput(f"a must have {N} coordinates")
    iu = np.triu_indices(N + 1, 1)
    log_const = gammaln(theta * (N + 1)) - (N + 1) * gammaln(theta)
    log_const += (1.0 - 2.0 * theta) * np.sum(np.log(bb[iu[0]] - bb[iu[1]]))
    inside = np.all((a < bb[:-1]) & (a > bb[1:]), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        if N > 1:
            ia = np.triu_indices(N, 1)
            gaps = a[..., ia[0]] - a[..., ia[1]]
            inside &= np.all(gaps > 0, axis=-1)
            vand = np.sum(np.log(np.abs(gaps)), axis=-1)
        else:
            vand = np.zeros(a.shape[:-1])
        cross = np.sum(np.log(np.abs(a[..., :, None] - bb)), axis=(-1, -2))
        val = log_const + vand + (theta - 1.0) * cross
    return np.where(inside, val, -np.inf)


def lambda_compose_sample(b, K: int, theta, rng: Optional[np.random.Generator] = None) -> List[WeylPoint]:
    """Rows at levels ``N-1, ..., K`` from successive kernel steps."""
    pts = _as_points(b)
    N = pts.size
    K = int(K)
    if not 1 <= K <= N:
        raise InvalidInput(f"need 1 <= K <= N, got K={K}, N={N}")
    rows = []
    cur = WeylPoint(pts)
    for _ in range(N - K):
        cur = dixon_anderson_sample(cur, theta, rng)
        rows.append(cur)
    return rows


def rejection_sample_level2(b, theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Exact draws from the explicit density at level 2 by rejection.

    Independent of the root-based sampler: the proposal puts ``a_i`` in
    ``[b_{i+1}, b_i]`` with scaled Beta(theta, theta) laws, and what remains of
    the density, ``(a_1 - a_2) |a_1 - b_3|^{theta-1} |a_2 - b_1|^{theta-1}``, is
    bounded on the box and handled by acceptance. Returns ``(n, 2)``.
    """
    bb = _as_points(b)
    theta = float(theta)
    if bb.size != 3 or np.any(np.diff(bb) >= 0):
        raise InvalidInput("need a strictly decreasing b of length 3")
    b1, b2, b3 = bb

    def log_ratio(a1, a2):
        r = np.log(np.maximum(a1 - a2, 0.0))
        return r + (theta - 1.0) * (np.log(a1 - b3) + np.log(b1 - a2))

    # the ratio is monotone in each coordinate, so the corners bound it
    if theta >= 1.0:
        bound = log_ratio(b1, b3)
    else:
        # a1 - a2 <= b1 - b3 and both |.|^{theta-1} factors are maximised at the
        # smallest distances, which are at least (b1 - b2) and (b2 - b3)
        bound = np.log(b1 - b3) + (theta - 1.0) * (np.log(b2 - b3) + np.log(b1 - b2))
    out = np.empty((0, 2))
    while out.shape[0] < n:
        m = max(2 * (n - out.shape[0]), 1024)
        a1 = b2 + (b1 - b2) * rng.beta(theta, theta, m)
        a2 = b3 + (b2 - b3) * rng.beta(theta, theta, m)
        keep = np.log(rng.random(m)) < log_ratio(a1, a2) - bound
        out = np.vstack([out, np.column_stack([a1[keep], a2[keep]])])
    return out[:n]
