"""Seeded random streams, two-sample tests and cumulant estimators."""
from __future__ import annotations

import os
from math import comb
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats as sps

from .errors import InsufficientData, InvalidInput

__all__ = [
    "DEFAULT_CHUNK",
    "make_rng",
    "resolve_threads",
    "chunked_draws",
    "parallel_map",
    "TestReport",
    "ks_two_sample",
    "ks_one_sample",
    "energy_two_sample",
    "empirical_cumulants",
    "ecdf",
    "empirical_charfn",
]

# draws per RNG chunk; fixed so that results do not depend on the thread count
DEFAULT_CHUNK = 8192


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``.

    The key acts as a stream/chunk address: two different keys under the same
    seed give statistically independent PCG64 streams.
    """
    if seed is None:
        raise InvalidInput("an explicit integer seed is required")
    seed = int(seed)
    if seed < 0:
        raise InvalidInput("seed must be non-negative")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else ``BETA_CHAINS_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("BETA_CHAINS_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def parallel_map(fn: Callable, items, threads: Optional[int] = None) -> list:
    """Ordered map over ``items``; the result never depends on ``threads``."""
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunked_draws(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    n: int,
    seed: int,
    stream: int = 0,
    chunk: int = DEFAULT_CHUNK,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Concatenate ``draw(rng_k, size_k)`` over fixed-size chunks.

    Chunk ``k`` always uses ``make_rng(seed, stream, k)``, so the output is the
    same for any number of worker threads.
    """
    n = int(n)
    if n < 0:
        raise InvalidInput("n must be non-negative")
    sizes = [min(chunk, n - start) for start in range(0, n, chunk)]

    def one(k):
        return np.asarray(draw(make_rng(seed, stream, k), sizes[k]))

    parts = parallel_map(one, range(len(sizes)), threads)
    if not parts:
        return np.asarray(draw(make_rng(seed, stream, 0), 0))
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class TestReport:
    """Outcome of a two-sample test."""

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    p_value: float
    n1: int
    n2: int
    method: str

    def rejects(self, level: float) -> bool:
        return self.p_value <= level

    def to_dict(self) -> dict:
        return asdict(self)


def _real_sample(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 0:
        raise InsufficientData(f"{name} is empty")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"{name} contains non-finite values")
    return x


def ks_two_sample(x, y) -> TestReport:
    """Two-sample Kolmogorov-Smirnov distance with asymptotic p-value."""
    x = _real_sample(x, "x")
    y = _real_sample(y, "y")
    res = sps.ks_2samp(x, y, method="asymp")
    return TestReport(float(res.statistic), float(res.pvalue), x.size, y.size, "KS")


def ks_one_sample(x, cdf: Callable) -> TestReport:
    """KS distance between a sample and a continuous reference CDF."""
    x = _real_sample(x, "x")
    res = sps.kstest(x, cdf, method="asymp")
    return TestReport(float(res.statistic), float(res.pvalue), x.size, 0, "KS")


def _as_points(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[1] < 1:
        raise InvalidInput(f"{name} must be an (n, d) point set")
    if not np.all(np.isfinite(X)):
        raise InvalidInput(f"{name} contains non-finite values")
    return X


def _pairwise_distances(Z: np.ndarray) -> np.ndarray:
    sq = np.sum(Z * Z, axis=1)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (Z @ Z.T)
    np.maximum(D2, 0.0, out=D2)
    np.fill_diagonal(D2, 0.0)
    return np.sqrt(D2, out=D2)


def energy_two_sample(
    X,
    Y,
    permutations: int = 999,
    rng: Optional[np.random.Generator] = None,
    max_points: Optional[int] = 2000,
    batch: int = 128,
) -> TestReport:
    """Energy-distance two-sample test with a permutation p-value.

    The statistic is the V-statistic ``2 E|X-Y| - E|X-X'| - E|Y-Y'|``. Groups
    larger than ``max_points`` are randomly subsampled first so the pooled
    distance matrix stays in memory.
    """
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise InvalidInput("X and Y must have the same dimension")
    if X.shape[0] < 10 or Y.shape[0] < 10:
        raise InsufficientData("energy test needs at least 10 points per group")
    if rng is None:
        raise InvalidInput("energy_two_sample needs an explicit rng")
    if max_points is not None:
        if X.shape[0] > max_points:
            X = X[rng.choice(X.shape[0], max_points, replace=False)]
        if Y.shape[0] > max_points:
            Y = Y[rng.choice(Y.shape[0], max_points, replace=False)]
    Z = np.vstack([X, Y])
    n1, n2 = X.shape[0], Y.shape[0]
    n = n1 + n2
    spread = np.ptp(Z, axis=0)
    if not np.any(spread > 0):
        raise InvalidInput("degenerate input: all points coincide")
    Z = Z - Z.mean(axis=0)
    D = _pairwise_distances(Z)
    row = D.sum(axis=1)
    total = row.sum()

    def stat(U: np.ndarray) -> np.ndarray:
        # U: (n, k) indicator columns of the first group
        xx = np.einsum("ik,ik->k", U, D @ U)
        xr = row @ U
        xy = xr - xx
        yy = total - 2.0 * xr + xx
        return 2.0 * xy / (n1 * n2) - xx / n1**2 - yy / n2**2

    u0 = np.zeros((n, 1))
    u0[:n1] = 1.0
    observed = float(stat(u0)[0])
    exceed = 0
    done = 0
    while done < permutations:
        k = min(batch, permutations - done)
        U = np.zeros((n, k))
        idx = rng.permuted(np.tile(np.arange(n), (k, 1)), axis=1)[:, :n1]
        U[idx.T, np.arange(k)[None, :]] = 1.0
        exceed += int(np.sum(stat(U) >= observed - 1e-12 * abs(observed)))
        done += k
    p = (exceed + 1.0) / (permutations + 1.0)
    return TestReport(max(observed, 0.0), float(p), n1, n2, "ENERGY")


def _central_moments_from_sums(S: np.ndarray, n: np.ndarray, r_max: int) -> np.ndarray:
    """Central moments m_2..m_rmax from raw power sums S[k] = sum x^k, k=0..r_max."""
    mean = S[1] / n
    out = np.zeros((r_max + 1,) + np.shape(n))
    for r in range(2, r_max + 1):
        acc = 0.0
        for j in range(r + 1):
            acc = acc + comb(r, j) * (S[j] / n) * (-mean) ** (r - j)
        out[r] = acc
    return out


def _cumulants_from_sums(S: np.ndarray, n, p_max: int) -> np.ndarray:
    """k-statistics for p <= 4, plug-in cumulants above, from power sums."""
    n = np.asarray(n, dtype=float)
    m = _central_moments_from_sums(S, n, max(p_max, 2))
    k = np.zeros((p_max,) + n.shape)
    k[0] = S[1] / n
    if p_max >= 2:
        k[1] = n / (n - 1) * m[2]
    if p_max >= 3:
        k[2] = n**2 / ((n - 1) * (n - 2)) * m[3]
    if p_max >= 4:
        k[3] = n**2 * ((n + 1) * m[4] - 3 * (n - 1) * m[2] ** 2) / ((n - 1) * (n - 2) * (n - 3))
    if p_max >= 5:
        # cumulants from central moments: kappa_r = m_r - sum C(r-1,j-1) kappa_j m_{r-j}
        kap = np.zeros((p_max + 1,) + n.shape)
        for r in range(2, p_max + 1):
            acc = m[r].copy()
            for j in range(2, r - 1):
                acc = acc - comb(r - 1, j - 1) * kap[j] * m[r - j]
            kap[r] = acc
        k[4:] = kap[5:]
    return k


def empirical_cumulants(x, p_max: int = 4, jackknife_blocks: int = 20):
    """Cumulant estimates of orders ``1..p_max`` with block-jackknife errors.

    Returns ``(kappa, stderr)`` as arrays of length ``p_max``. Orders up to 4
    use unbiased k-statistics, higher orders the plug-in cumulants.
    """
    x = _real_sample(x, "x")
    p_max = int(p_max)
    B = int(jackknife_blocks)
    if p_max < 1:
        raise InvalidInput("p_max must be >= 1")
    if B < 2:
        raise InvalidInput("need at least 2 jackknife blocks")
    n = x.size
    if n < 10 * B or n <= p_max:
        raise InsufficientData(f"need at least {10 * B} points for {B} blocks, got {n}")
    shift = float(np.mean(x))
    scale = float(np.std(x)) or 1.0
    z = (x - shift) / scale
    blocks = np.array_split(z, B)
    orders = np.arange(p_max + 1)
    S_blocks = np.array([[np.sum(b**k) for k in orders] for b in blocks]).T  # (p+1, B)
    S_all = S_blocks.sum(axis=1)
    n_blocks = np.array([b.size for b in blocks], dtype=float)
    full = _cumulants_from_sums(S_all[:, None], np.array([float(n)]), p_max)[:, 0]
    loo = _cumulants_from_sums(S_all[:, None] - S_blocks, n - n_blocks, p_max)
    dev = loo - loo.mean(axis=1, keepdims=True)
    se = np.sqrt((B - 1) / B * np.sum(dev**2, axis=1))
    powers = scale ** np.arange(1, p_max + 1)
    kappa = full * powers
    kappa[0] += shift
    return kappa, se * powers


def ecdf(x):
    """Sorted sample values and their ECDF heights."""
    x = np.sort(_real_sample(x, "x"))
    return x, np.arange(1, x.size + 1) / x.size


def empirical_charfn(x, grid) -> np.ndarray:
    """``mean(exp(i t x))`` for each ``t`` in ``grid``, computed in blocks."""
    x = _real_sample(x, "x")
    grid = np.asarray(grid, dtype=float).reshape(-1)
    out = np.zeros(grid.size, dtype=complex)
    step = max(1, 2_000_000 // max(grid.size, 1))
    for start in range(0, x.size, step):
        phase = np.outer(grid, x[start:start + step])
        out += np.cos(phase).sum(axis=1) + 1j * np.sin(phase).sum(axis=1)
    return out / x.size
