"""Monic real-rooted polynomials.

Coefficients are stored highest degree first, ``coeffs[0] == 1``, the same
ordering as :func:`numpy.roots`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .config import TOL
from .errors import InvalidInput, NotRealRooted

__all__ = [
    "RealRootedPoly",
    "poly_from_roots",
    "evaluate",
    "real_roots",
    "derivative",
    "power_sums_to_elementary",
    "elementary_to_power_sums",
    "hermite",
    "hermite_zeros",
]


def _finite_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class RealRootedPoly:
    """Monic polynomial, optionally carrying its (nonincreasing) roots."""

    coeffs: np.ndarray
    roots: Optional[np.ndarray] = None

    def __post_init__(self):
        c = _finite_vector(self.coeffs, "coeffs")
        if c.size < 1 or c[0] != 1.0:
            raise InvalidInput("polynomial must be monic with coeffs[0] == 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.roots is not None:
            r = _finite_vector(self.roots, "roots")
            if r.size != c.size - 1:
                raise InvalidInput("cached roots must have length degree")
            if np.any(np.diff(r) > 0):
                raise InvalidInput("cached roots must be nonincreasing")
            r.setflags(write=False)
            object.__setattr__(self, "roots", r)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return evaluate(self, z)

    def __repr__(self) -> str:
        return f"RealRootedPoly(coeffs={self.coeffs.tolist()})"


def poly_from_roots(roots: Sequence[float]) -> RealRootedPoly:
    """Expand ``prod (z - r)`` one linear factor at a time."""
    r = _finite_vector(roots, "roots")
    r = np.sort(r)[::-1]
    c = np.ones(1)
    for root in r:
        c = np.append(c, 0.0) - np.concatenate(([0.0], root * c))
    return RealRootedPoly(c, roots=r)


def evaluate(p: RealRootedPoly, z):
    """Horner evaluation; works for real or complex ``z`` (scalar or array)."""
    z = np.asarray(z)
    out = np.zeros_like(z, dtype=np.result_type(z, float))
    for c in p.coeffs:
        out = out * z + c
    return out


def _evaluation_scale(coeffs: np.ndarray, x) -> np.ndarray:
    return evaluate(RealRootedPoly(np.concatenate(([1.0], np.abs(coeffs[1:])))), np.abs(x))


def _newton_polish(c: np.ndarray, x: np.ndarray, steps: int = 3) -> np.ndarray:
    # a step is kept only where it lowers |p|, so clustered roots stay put
    d = c[:-1] * np.arange(c.size - 1, 0, -1)
    for _ in range(steps):
        px = np.polyval(c, x)
        dpx = np.polyval(d, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = np.where(dpx != 0, x - px / dpx, x)
        x = np.where(np.abs(np.polyval(c, xn)) < np.abs(px), xn, x)
    return x


def _refine_clusters(c: np.ndarray, x: np.ndarray, scale: float) -> np.ndarray:
    """Move each tight group of ``m`` roots onto the nearby simple root of ``p^{(m-1)}``.

    A root of multiplicity ``m`` is a simple root of the ``(m-1)``-th
    derivative, where Newton is well conditioned. The move is kept only if it
    does not raise ``|p|`` above its previous value or the rounding floor, so
    genuinely distinct close roots are left alone.
    """
    order = np.argsort(x)
    xs = x[order]
    breaks = np.flatnonzero(np.diff(xs) > 1e-3 * scale) + 1
    eps_floor = 8.0 * np.finfo(float).eps
    for grp in np.split(np.arange(xs.size), breaks):
        m = grp.size
        if m < 2:
            continue
        d = c.copy()
        for _ in range(m - 1):
            d = d[:-1] * np.arange(d.size - 1, 0, -1)
        dd = d[:-1] * np.arange(d.size - 1, 0, -1)
        z = float(np.mean(xs[grp]))
        for _ in range(4):
            slope = np.polyval(dd, z)
            if slope == 0:
                break
            z -= np.polyval(d, z) / slope
        old = np.max(np.abs(np.polyval(c, xs[grp])))
        new = abs(np.polyval(c, z))
        floor = eps_floor * float(_evaluation_scale(c, z))
        if np.isfinite(z) and abs(z - xs[grp].mean()) <= 1e-3 * scale and new <= max(old, floor):
            xs[grp] = z
    out = np.empty_like(x)
    out[order] = xs
    return out


def real_roots(p: RealRootedPoly, use_cache: bool = True) -> np.ndarray:
    """All roots of a polynomial known to be real-rooted, nonincreasing.

    Companion-matrix eigenvalues after rescaling ``z -> s z`` so that the
    coefficients are of comparable size. A complex pair is accepted as a real
    cluster when the polynomial nearly vanishes at its real part, which is what
    happens around multiple roots; otherwise :class:`NotRealRooted` is raised.
    """
    if use_cache and p.roots is not None:
        return p.roots.copy()
    n = p.degree
    if n == 0:
        return np.empty(0)
    c = p.coeffs
    # power-of-two rescaling by the rms root, read off from c_1 and c_2
    ms = (c[1] ** 2 - 2.0 * c[2]) / n if n >= 2 else c[1] ** 2
    s = 2.0 ** np.round(0.5 * np.log2(abs(ms))) if ms != 0 else 1.0
    z = np.roots(c * s ** -np.arange(n + 1.0)) * s
    scale = max(1.0, float(np.max(np.abs(z))))
    x = _refine_clusters(c, _newton_polish(c, z.real), scale)
    bad = np.abs(z.imag) > TOL.imag_rel * scale
    resid = np.abs(evaluate(p, x))
    ok = resid <= TOL.eval_rel * (1.0 + _evaluation_scale(c, x))
    if np.any(~ok):
        worst = int(np.argmax(np.where(ok, 0.0, np.abs(z.imag) + resid)))
        kind = "complex root" if bad[worst] else "root residual too large"
        raise NotRealRooted(f"{kind}: {z[worst]!r} (residual {resid[worst]:.3g})")
    return np.sort(x)[::-1]


def derivative(p: RealRootedPoly, normalize_monic: bool = True) -> RealRootedPoly:
    n = p.degree
    if n < 1:
        raise InvalidInput("derivative needs degree >= 1")
    d = p.coeffs[:-1] * np.arange(n, 0, -1)
    if normalize_monic:
        return RealRootedPoly(d / n)
    # raw derivative has leading coefficient n; wrap without the monic check
    return _RawPoly(d)


class _RawPoly(RealRootedPoly):
    """Non-monic polynomial returned by ``derivative(..., normalize_monic=False)``."""

    def __post_init__(self):
        c = _finite_vector(self.coeffs, "coeffs")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __repr__(self) -> str:
        return f"Poly(coeffs={self.coeffs.tolist()})"


def power_sums_to_elementary(s: Sequence[float]) -> np.ndarray:
    """Newton's identities: ``j e_j = sum_{k=1}^{j} (-1)^{k-1} e_{j-k} s_k``."""
    s = _finite_vector(s, "power sums")
    K = s.size
    e = np.zeros(K + 1)
    e[0] = 1.0
    for jj in range(1, K + 1):
        k = np.arange(1, jj + 1)
        e[jj] = np.sum((-1.0) ** (k - 1) * e[jj - k] * s[k - 1]) / jj
    return e[1:]


def elementary_to_power_sums(e: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`power_sums_to_elementary`."""
    e = _finite_vector(e, "elementary symmetric functions")
    K = e.size
    ee = np.concatenate(([1.0], e))
    s = np.zeros(K)
    for jj in range(1, K + 1):
        acc = (-1.0) ** (jj - 1) * jj * ee[jj]
        for k in range(1, jj):
            acc += (-1.0) ** (k - 1) * ee[k] * s[jj - k - 1]
        s[jj - 1] = acc
    return s


def hermite(N: int) -> RealRootedPoly:
    """Monic Hermite polynomial ``(z - d/dz)^N 1`` via ``H_{n+1} = z H_n - H_n'``."""
    if N < 1:
        raise InvalidInput("hermite needs N >= 1")
    c = np.ones(1)
    for n in range(N):
        shifted = np.append(c, 0.0)
        if n > 0:
            d = c[:-1] * np.arange(n, 0, -1)
            shifted[2:] -= d
        c = shifted
    return RealRootedPoly(c)


def hermite_zeros(N: int) -> np.ndarray:
    """Zeros of :func:`hermite` (N), nonincreasing, from the Jacobi matrix."""
    if N < 1:
        raise InvalidInput("hermite_zeros needs N >= 1")
    if N == 1:
        return np.zeros(1)
    z = eigvalsh_tridiagonal(np.zeros(N), np.sqrt(np.arange(1.0, N)))
    # exact symmetry of the spectrum
    z = 0.5 * (z - z[::-1])
    return z[::-1]
