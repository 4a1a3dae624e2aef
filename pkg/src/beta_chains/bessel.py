"""Monte-Carlo multivariate Bessel functions and related checks.

``B_a(y; theta) = E[exp(sum_k y_k d_k)]`` where ``d`` are the diagonal entries
of the orbital array with top row ``a``. Fewer than ``N`` arguments are padded
with zeros.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import factorial
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DegenerateArguments, InvalidInput, InvalidParameter
from .kernels import WeylPoint, as_theta, dixon_anderson_sample_batch
from .orbital import orbital_sample_batch
from .quadrature import gauss_jacobi, simplex2_rule
from .stats import DEFAULT_CHUNK, make_rng

__all__ = [
    "BesselEstimate",
    "orbital_diagonal_draws",
    "bessel_mc",
    "bessel_from_draws",
    "bessel_hciz_oracle",
    "dunkl_transform_mc",
    "ProductFormulaReport",
    "verify_product_formula",
]


@dataclass(frozen=True)
class BesselEstimate:
    value: complex
    std_error: float
    n_samples: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"] = [self.value.real, self.value.imag]
        return d


def _points(a) -> np.ndarray:
    return a.points if isinstance(a, WeylPoint) else WeylPoint(a).points


def orbital_diagonal_draws(a, m: int, theta, n: int, rng: np.random.Generator, entries: str = "top") -> np.ndarray:
    """``n`` draws of ``m`` diagonal entries of the orbital array with top ``a``.

    The diagonal entries are exchangeable, so ``entries="top"`` returns the
    last ``m`` of them, which need only ``m`` kernel steps, in place of the
    first ``m`` (``entries="bottom"``, the full array).
    """
    t = _points(a)
    N = t.size
    if not 1 <= m <= N:
        raise InvalidInput("need 1 <= m <= N")
    if entries == "top":
        rows = [np.tile(t, (int(n), 1))]
        for _ in range(m):
            if rows[-1].shape[1] == 1:
                break
            rows.append(dixon_anderson_sample_batch(rows[-1], theta, rng))
        sums = np.column_stack([r.sum(axis=1) for r in rows])
        d = -np.diff(sums, axis=1)
        if d.shape[1] < m:
            # m == N: the last entry is the level-1 row itself
            d = np.column_stack([d, rows[-1][:, 0]])
        return d[:, :m]
    if entries == "bottom":
        batch = orbital_sample_batch(t, theta, n, rng)
        return batch.diagonal_entries()[:, :m]
    raise InvalidInput(f"unknown entries option {entries!r}")


def bessel_from_draws(d: np.ndarray, y) -> BesselEstimate:
    """Sample mean of ``exp(d @ y)`` with its standard error."""
    y = np.asarray(y, dtype=complex).reshape(-1)
    vals = np.exp(d[:, : y.size] @ y)
    n = vals.shape[0]
    se = np.sqrt((np.var(vals.real) + np.var(vals.imag)) / max(n - 1, 1)) if n > 1 else 0.0
    return BesselEstimate(complex(np.mean(vals)), float(se), int(n))


def bessel_mc(a, y, theta, n: int, rng: Optional[np.random.Generator], entries: str = "top") -> BesselEstimate:
    """Monte-Carlo estimate of ``B^N_a(y_1..y_m; theta)``."""
    t = _points(a)
    y = np.asarray(y, dtype=complex).reshape(-1)
    if y.size < 1 or y.size > t.size:
        raise InvalidInput("need 1 <= len(y) <= N")
    if np.all(y == 0):
        return BesselEstimate(1.0 + 0j, 0.0, 1)
    if t.size == 1:
        return BesselEstimate(complex(np.exp(t[0] * y[0])), 0.0, 1)
    if np.all(t == t[0]):
        return BesselEstimate(complex(np.exp(t[0] * np.sum(y))), 0.0, 1)
    if n < 100:
        raise InvalidInput("n must be at least 100")
    theta = as_theta(theta)
    theta.finite()
    if rng is None:
        raise InvalidInput("bessel_mc needs an rng")
    d = orbital_diagonal_draws(t, y.size, theta, n, rng, entries)
    return bessel_from_draws(d, y)


def bessel_hciz_oracle(a, y) -> complex:
    """theta = 1 closed form ``prod_{k<N} k! det(e^{a_i y_j}) / (V(a) V(y))``."""
    a = np.asarray(a, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=complex).reshape(-1)
    N = a.size
    if y.size != N:
        raise InvalidInput("a and y must have the same length")
    iu = np.triu_indices(N, 1)
    va = a[iu[0]] - a[iu[1]]
    vy = y[iu[0]] - y[iu[1]]
    if np.any(va == 0):
        raise DegenerateArguments("coincident entries in a")
    if np.any(vy == 0):
        raise DegenerateArguments("coincident entries in y")
    const = float(np.prod([factorial(k) for k in range(1, N)]))
    det = np.linalg.det(np.exp(np.outer(a, y)))
    return complex(const * det / (np.prod(va) * np.prod(vy)))


def dunkl_transform_mc(row_samples, y, theta, rng: np.random.Generator, n_inner: int = 200) -> BesselEstimate:
    """Nested estimate of the Dunkl transform of the empirical row law.

    Averages ``B_{row}(i y)`` over the rows; the standard error is taken from
    the spread of the per-row estimates, which already includes the inner
    Monte-Carlo noise.
    """
    rows = np.atleast_2d(np.asarray([_points(r) for r in row_samples]))
    y = np.asarray(y, dtype=float).reshape(-1)
    K = rows.shape[1]
    if y.size != K:
        raise InvalidInput("y must have one entry per row coordinate")
    vals = np.empty(rows.shape[0], dtype=complex)
    for i, r in enumerate(rows):
        vals[i] = bessel_mc(r, 1j * y, theta, n_inner, rng).value
    R = vals.size
    se = float(np.sqrt((np.var(vals.real) + np.var(vals.imag)) / max(R - 1, 1))) if R > 1 else 0.0
    return BesselEstimate(complex(np.mean(vals)), se, R)


@dataclass
class ProductFormulaReport:
    lhs: complex
    rhs: complex
    lhs_error: float
    rhs_error: float
    quadrature_error: float
    combined_error: float

    @property
    def passed(self) -> bool:
        return abs(self.lhs - self.rhs) <= 3.0 * self.combined_error

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lhs"] = self.lhs.real
        d["rhs"] = self.rhs.real
        d["passed"] = self.passed
        return d


def _product_integrand_weightless(ys: np.ndarray, y: float, z: np.ndarray, theta: float, N: int) -> np.ndarray:
    """``G * F^{theta(N-m)-1}`` divided by the weights handled by the rule.

    ``z`` has shape ``(Q, m)``. The rule carries ``prod z_i^{theta-1}`` and
    ``(1 - sum z / y)^{theta(N-m)-1}`` (as ``(y - sum z)^{...}``).
    """
    m = ys.size
    Q = z.shape[0]
    yy = np.column_stack([np.tile(ys, (Q, 1)), y - z.sum(axis=1)])  # y_{m+1} = y - sum z
    zz = np.column_stack([z, np.zeros(Q)])  # z_{m+1} = 0
    logG = np.zeros(Q)
    for i in range(m):
        for j in range(i + 1, m):
            logG += (theta - 1.0) * np.log(yy[:, i] - yy[:, j] + zz[:, i])
    prodG = np.ones(Q)
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            prodG *= yy[:, i] - yy[:, j] + zz[:, i] - zz[:, j]
            logG += (theta - 1.0) * np.log(yy[:, i] - yy[:, j] - zz[:, j])
    c = theta * (N - m) - 1.0
    logF_rest = c * np.sum(np.log1p(z / ys), axis=1) - c * np.log(y)
    return prodG * np.exp(logG + logF_rest)


def verify_product_formula(
    a,
    y_list: Sequence[float],
    y: float,
    theta: float,
    quadrature_cfg: Optional[dict] = None,
    rng: Optional[np.random.Generator] = None,
    n: int = 200_000,
    entries: str = "top",
) -> ProductFormulaReport:
    """Compare both sides of the two-Bessel product formula for ``m <= 2``.

    The right side's inner Bessel function is estimated from one set of
    orbital draws shared by all quadrature nodes, so the integral is a
    per-draw quantity ``R_s`` whose mean and standard error are reported. The
    quadrature error is the change between two rule sizes.
    """
    t = _points(a)
    N = t.size
    ys = np.asarray(y_list, dtype=float).reshape(-1)
    m = ys.size
    th = as_theta(theta).finite()
    y = float(y)
    if m not in (1, 2):
        raise InvalidParameter("only m in {1, 2} is supported")
    if N < m + 1:
        raise InvalidParameter("need N >= m + 1")
    if not (y > 0 and np.all(np.diff(ys) < 0) and ys[-1] > y):
        raise InvalidParameter("need y_1 > ... > y_m > y > 0")
    if m >= 2 and np.min(-np.diff(ys)) <= y:
        raise InvalidParameter("need min(y_i - y_{i+1}) > y")
    if rng is None:
        raise InvalidInput("verify_product_formula needs an rng")
    cfg = {"nodes": 24, "coarse_nodes": 16, "method": "gauss-jacobi"}
    cfg.update(quadrature_cfg or {})

    # left side: independent draws for the two factors
    d1 = orbital_diagonal_draws(t, m, th, n, rng, entries)
    d2 = orbital_diagonal_draws(t, 1, th, n, rng, entries)
    b1 = bessel_from_draws(d1, -ys)
    b2 = bessel_from_draws(d2, [-y])
    lhs = b1.value * b2.value
    lhs_err = float(np.hypot(abs(b1.value) * b2.std_error, abs(b2.value) * b1.std_error))

    iu = np.triu_indices(m, 1)
    log_pref = gammaln(N * th) - gammaln((N - m) * th) - m * gammaln(th)
    log_pref += (1.0 - 2.0 * th) * np.sum(np.log(ys[iu[0]] - ys[iu[1]]))
    log_pref -= m * th * np.log(y) + th * np.sum(np.log(ys))
    pref = np.exp(log_pref)

    d = orbital_diagonal_draws(t, m + 1, th, n, rng, entries)
    c = th * (N - m) - 1.0

    def per_draw(nodes: int) -> np.ndarray:
        if m == 1:
            zq, wq = gauss_jacobi(nodes, c, th - 1.0, 0.0, y)
            zq = zq[:, None]
        else:
            zq, wq = simplex2_rule(nodes, y, th - 1.0, th - 1.0, c)
        h = wq * _product_integrand_weightless(ys, y, zq, th, N)
        # arguments of the inner Bessel function at every node
        args = np.column_stack([-(ys[None, :] + zq), -y + zq.sum(axis=1)])
        out = np.zeros(d.shape[0])
        for start in range(0, d.shape[0], DEFAULT_CHUNK):
            blk = d[start:start + DEFAULT_CHUNK]
            out[start:start + blk.shape[0]] = np.exp(blk @ args.T) @ h
        return pref * out

    if cfg["method"] == "adaptive" and m == 1:
        # z = y u^{1/theta} absorbs z^{theta-1}; quad_vec works on all draws at once
        def g(u):
            z = y * u ** (1.0 / th)
            zq = np.array([[z]])
            wfac = (y**th / th) * (1.0 - z / y) ** c * y**c
            h = wfac * _product_integrand_weightless(ys, y, zq, th, N)[0]
            return pref * h * np.exp(d @ np.array([-(ys[0] + z), -y + z]))

        R, qerr = integrate.quad_vec(g, 0.0, 1.0, epsabs=1e-10, epsrel=1e-8)
        quad_err = float(qerr)
    else:
        R = per_draw(int(cfg["nodes"]))
        R_coarse = per_draw(int(cfg["coarse_nodes"]))
        quad_err = float(abs(np.mean(R) - np.mean(R_coarse)))
    rhs = complex(np.mean(R))
    rhs_err = float(np.std(R) / np.sqrt(R.size - 1))
    comb = float(np.sqrt(lhs_err**2 + rhs_err**2 + quad_err**2))
    return ProductFormulaReport(complex(lhs), rhs, lhs_err, rhs_err, quad_err, comb)
