"""Quadrature rules for integrands with algebraic endpoint singularities."""
from __future__ import annotations

import itertools
from typing import Callable, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln, roots_jacobi

from .errors import InvalidInput
from .kernels import WeylPoint, as_theta, dixon_anderson_log_density

__all__ = [
    "gauss_jacobi",
    "simplex2_rule",
    "kernel_density_mass",
]


def gauss_jacobi(n: int, a: float, b: float, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int_lo^hi f(x) (hi - x)^a (x - lo)^b dx``."""
    if not hi > lo:
        raise InvalidInput("need hi > lo")
    if a <= -1 or b <= -1:
        raise InvalidInput("Jacobi exponents must exceed -1")
    t, w = roots_jacobi(int(n), a, b)
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1.0), w * half ** (a + b + 1.0)


def simplex2_rule(n: int, y: float, e1: float, e2: float, e3: float):
    """Rule for ``int z1^e1 z2^e2 (y - z1 - z2)^e3 f(z1, z2)`` over the simplex.

    With ``z1 = y s u``, ``z2 = y s (1 - u)`` the weight factorizes into Jacobi
    weights in ``s`` and ``u``; returns nodes ``(M, 2)`` and weights ``(M,)``.
    """
    s, ws = gauss_jacobi(n, e3, e1 + e2 + 1.0, 0.0, 1.0)
    u, wu = gauss_jacobi(n, e2, e1, 0.0, 1.0)
    S, U = np.meshgrid(s, u, indexing="ij")
    W = np.outer(ws, wu) * y ** (e1 + e2 + e3 + 2.0)
    Z = np.column_stack([(y * S * U).ravel(), (y * S * (1.0 - U)).ravel()])
    return Z, W.ravel()


def _density_remainder(bb: np.ndarray, theta: float) -> Callable[[np.ndarray], np.ndarray]:
    """Density without the adjacent factors ``|a_i - b_i|, |a_i - b_{i+1}|``.

    Smooth and finite on the closed box, including its faces.
    """
    N = bb.size - 1
    iu = np.triu_indices(N + 1, 1)
    log_const = gammaln(theta * (N + 1)) - (N + 1) * gammaln(theta)
    log_const += (1.0 - 2.0 * theta) * np.sum(np.log(bb[iu[0]] - bb[iu[1]]))
    i_idx, j_idx = np.meshgrid(np.arange(N), np.arange(N + 1), indexing="ij")
    far = (j_idx != i_idx) & (j_idx != i_idx + 1)
    ia = np.triu_indices(N, 1)

    def f(a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        vand = np.prod(a[..., ia[0]] - a[..., ia[1]], axis=-1) if N > 1 else 1.0
        dist = np.where(far, np.abs(a[..., :, None] - bb), 1.0)
        cross = np.sum(np.log(dist), axis=(-1, -2))
        return np.exp(log_const + (theta - 1.0) * cross) * vand

    return f


def kernel_density_mass(b, theta, method: str = "gauss-jacobi", n: int = 24, epsabs: float = 1e-11):
    """Total mass of the explicit kernel density over the interlacing region.

    The region is the box ``a_i in [b_{i+1}, b_i]``. ``"gauss-jacobi"`` uses a
    tensor rule carrying the ``|a_i - b_i|^{theta-1} |a_i - b_{i+1}|^{theta-1}``
    factors as weights, so the remaining integrand is smooth; ``"adaptive"``
    nests :func:`scipy.integrate.quad` with its algebraic-weight option on a
    separately coded smooth remainder of the density. Returns
    ``(mass, error_estimate)``.
    """
    bb = b.points if isinstance(b, WeylPoint) else WeylPoint(b).points
    th = as_theta(theta).finite()
    N = bb.size - 1
    if N < 1:
        raise InvalidInput("b must have level >= 2")
    f = _density_remainder(bb, th)
    if method == "gauss-jacobi":

        def rule(m):
            nodes, weights = zip(*[gauss_jacobi(m, th - 1.0, th - 1.0, bb[i + 1], bb[i]) for i in range(N)])
            pts = np.array(list(itertools.product(*nodes)))
            w = np.prod(np.array(list(itertools.product(*weights))), axis=1)
            # nodes are interior, so the library log-density can be used as is
            lw = np.sum(np.log(bb[:-1] - pts) + np.log(pts - bb[1:]), axis=-1)
            vals = np.exp(dixon_anderson_log_density(bb, pts, th) - (th - 1.0) * lw)
            return float(np.sum(w * vals))

        fine = rule(n)
        coarse = rule(max(2, n - 6))
        return fine, abs(fine - coarse)
    if method == "adaptive":
        wvar = (th - 1.0, th - 1.0)

        def inner(level: int, prefix: tuple) -> Tuple[float, float]:
            lo, hi = bb[level + 1], bb[level]
            if level == N - 1:
                g = lambda x: float(f(np.array(prefix + (x,))))
            else:
                g = lambda x: inner(level + 1, prefix + (x,))[0]
            val, err = integrate.quad(g, lo, hi, weight="alg", wvar=wvar, epsabs=epsabs, epsrel=1e-10, limit=200)
            return val, err

        # with weight='alg' quad integrates g(x) (x-lo)^p (hi-x)^q and f already
        # excludes exactly those factors
        return inner(0, ())
    raise InvalidInput(f"unknown method {method!r}")
