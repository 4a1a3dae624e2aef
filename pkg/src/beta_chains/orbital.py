"""Interlacing arrays and orbital beta processes (fixed top row)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import InsufficientData, InvalidInput
from .kernels import (
    WeylPoint,
    as_theta,
    dirichlet_sample,
    dixon_anderson_sample,
    dixon_anderson_sample_batch,
)
from .stats import TestReport, energy_two_sample

__all__ = [
    "InterlacingArray",
    "OrbitalBatch",
    "orbital_sample",
    "orbital_sample_batch",
    "diagonal_entries",
    "bottom_entry_dirichlet_sample",
    "exchangeability_check",
]


@dataclass(frozen=True)
class InterlacingArray:
    """Rows at levels ``1..N``; ``rows[i]`` has level ``i + 1``."""

    rows: tuple

    def __init__(self, rows: Sequence):
        rows = tuple(r if isinstance(r, WeylPoint) else WeylPoint(r) for r in rows)
        if not rows:
            raise InvalidInput("an array needs at least one row")
        for k, r in enumerate(rows):
            if r.level != k + 1:
                raise InvalidInput(f"row {k} has level {r.level}, expected {k + 1}")
        for lo, hi in zip(rows[:-1], rows[1:]):
            if not lo.interlaces(hi):
                raise InvalidInput(f"rows at levels {lo.level} and {hi.level} do not interlace")
        object.__setattr__(self, "rows", rows)

    @property
    def N(self) -> int:
        return len(self.rows)

    @property
    def top(self) -> WeylPoint:
        return self.rows[-1]

    def to_lists(self) -> List[List[float]]:
        return [r.points.tolist() for r in self.rows]


@dataclass
class OrbitalBatch:
    """Many independent orbital arrays with one top row, stored row-wise.

    ``rows[k]`` has shape ``(n, k + 1)``.
    """

    rows: List[np.ndarray]

    @property
    def n(self) -> int:
        return self.rows[0].shape[0]

    @property
    def N(self) -> int:
        return len(self.rows)

    def diagonal_entries(self) -> np.ndarray:
        sums = np.column_stack([r.sum(axis=1) for r in self.rows])
        return np.column_stack([sums[:, 0], np.diff(sums, axis=1)])

    def array(self, i: int) -> InterlacingArray:
        return InterlacingArray([r[i] for r in self.rows])


def _top_points(top) -> np.ndarray:
    return top.points if isinstance(top, WeylPoint) else WeylPoint(top).points


def orbital_sample(top, theta, rng: Optional[np.random.Generator] = None) -> InterlacingArray:
    """One orbital array: rows ``N-1, ..., 1`` from successive kernel steps."""
    cur = WeylPoint(_top_points(top))
    rows = [cur]
    for _ in range(cur.level - 1):
        cur = dixon_anderson_sample(cur, theta, rng)
        rows.append(cur)
    return InterlacingArray(rows[::-1])


def orbital_sample_batch(
    top,
    theta,
    n: int,
    rng: Optional[np.random.Generator],
    stop_level: int = 1,
) -> OrbitalBatch:
    """``n`` independent orbital arrays, down to ``stop_level``.

    Rows below ``stop_level`` are not generated; ``rows[k]`` is then ``None``
    for levels ``k + 1 < stop_level``.
    """
    t = _top_points(top)
    theta = as_theta(theta)
    N = t.size
    if not 1 <= stop_level <= N:
        raise InvalidInput("stop_level must lie in 1..N")
    cur = np.tile(t, (int(n), 1))
    rows: List[Optional[np.ndarray]] = [None] * N
    rows[N - 1] = cur
    for lev in range(N - 1, stop_level - 1, -1):
        cur = dixon_anderson_sample_batch(cur, theta, rng)
        rows[lev - 1] = cur
    return OrbitalBatch(rows)


def diagonal_entries(arr: InterlacingArray) -> np.ndarray:
    """``d_1 = a^{(1)}_1`` and ``d_{i+1} = sum a^{(i+1)} - sum a^{(i)}``."""
    sums = np.array([np.sum(r.points) for r in arr.rows])
    return np.concatenate([[sums[0]], np.diff(sums)])


def bottom_entry_dirichlet_sample(top, theta: float, rng: np.random.Generator, size=None):
    """``sum_j alpha_j top_j`` with ``alpha ~ Dirichlet(theta)``.

    A one-step draw of the level-1 entry of an orbital array with this top
    row, used as an oracle for the multi-step sampler.
    """
    t = _top_points(top)
    theta = as_theta(theta).finite()
    if np.all(t == t[0]):
        return t[0] if size is None else np.full(int(size), t[0])
    alpha = dirichlet_sample(t.size, theta, rng, size=size)
    return alpha @ t


def exchangeability_check(
    samples,
    permutation_count: int = 999,
    rng: Optional[np.random.Generator] = None,
    max_points: int = 2000,
) -> TestReport:
    """Energy test of exchangeability for the columns of ``samples``.

    The rows are split in two halves; the second half has its columns
    permuted independently per row, and the halves are compared. Under
    exchangeability the two halves have the same law.
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise InvalidInput("need a matrix with at least 2 columns")
    if X.shape[0] < 20:
        raise InsufficientData("need at least 20 rows")
    if rng is None:
        raise InvalidInput("exchangeability_check needs an explicit rng")
    half = X.shape[0] // 2
    A = X[:half]
    B = rng.permuted(X[half: 2 * half], axis=1)
    return energy_two_sample(A, B, permutations=permutation_count, rng=rng, max_points=max_points)
