from __future__ import annotations

import numpy as np
import pytest
from scipy import stats as sps

from beta_chains.errors import InsufficientData, InvalidInput
from beta_chains.kernels import WeylPoint
from beta_chains.orbital import (
    InterlacingArray,
    bottom_entry_dirichlet_sample,
    diagonal_entries,
    exchangeability_check,
    orbital_sample,
    orbital_sample_batch,
)
from beta_chains.polyroots import hermite_zeros


def test_constant_top_row(rng):
    arr = orbital_sample([1.5] * 4, 0.7, rng)
    assert all(np.all(r.points == 1.5) for r in arr.rows)
    assert np.array_equal(diagonal_entries(arr), [1.5] * 4)


def test_theta_inf_hermite_rows():
    g2 = 2.0
    arr = orbital_sample(np.sqrt(g2) * hermite_zeros(6), "inf")
    for i, row in enumerate(arr.rows, start=1):
        assert np.allclose(row.points, np.sqrt(g2) * hermite_zeros(i), atol=1e-10)


def test_array_interlaces_and_diagonal_range(rng):
    top = [3.0, 1.0, 0.0, -2.0]
    for _ in range(20):
        arr = orbital_sample(top, 0.5, rng)
        for lo, hi in zip(arr.rows[:-1], arr.rows[1:]):
            assert lo.interlaces(hi)
        d = diagonal_entries(arr)
        assert d[0] == arr.rows[0].points[0]
        assert np.all(d <= 3.0 + 1e-12) and np.all(d >= -2.0 - 1e-12)
        assert np.sum(d) == pytest.approx(np.sum(top))


def test_diagonal_entries_examples():
    assert np.array_equal(diagonal_entries(InterlacingArray([[0.0], [1.0, -1.0]])), [0.0, 0.0])
    assert np.allclose(diagonal_entries(InterlacingArray([[0.3], [1.0, 0.0]])), [0.3, 0.7])


def test_interlacing_array_validation():
    with pytest.raises(InvalidInput):
        InterlacingArray([[2.0], [1.0, 0.0]])


def test_bottom_entry_uniform(rng):
    x = orbital_sample_batch([1.0, 0.0], 1.0, 100_000, rng).rows[0][:, 0]
    assert abs(x.mean() - 0.5) < 3 * np.sqrt(1 / 12 / x.size)
    assert abs(x.var() - 1 / 12) < 3 * np.sqrt(1 / 180 / x.size)


@pytest.mark.parametrize("theta", [0.5, 2.0])
def test_dirichlet_bottom_entry_beta(rng, theta):
    x = bottom_entry_dirichlet_sample([1.0, 0.0], theta, rng, size=100_000)
    var = 1 / (4 * (2 * theta + 1))
    mu4 = sps.beta(theta, theta).moment(4) - 4 * 0.5 * sps.beta(theta, theta).moment(3) + 6 * 0.25 * sps.beta(theta, theta).moment(2) - 3 * 0.0625
    assert abs(x.var() - var) < 4 * np.sqrt((mu4 - var**2) / x.size)
    assert bottom_entry_dirichlet_sample([0.2, 0.2], theta, rng) == 0.2


def test_multi_step_matches_dirichlet(rng):
    top = [2.0, 0.5, 0.0, -1.0]
    a = orbital_sample_batch(top, 0.5, 20_000, rng).rows[0][:, 0]
    b = bottom_entry_dirichlet_sample(top, 0.5, rng, size=20_000)
    assert sps.ks_2samp(a, b).statistic < 0.025


def test_exchangeability(rng):
    d = orbital_sample_batch([2.0, 1.0, 0.0], 1.0, 4000, rng).diagonal_entries()
    assert not exchangeability_check(d, 199, rng).rejects(0.001)
    sorted_cols = np.sort(rng.normal(size=(2000, 3)), axis=1)
    assert exchangeability_check(sorted_cols, 199, rng).rejects(0.01)
    with pytest.raises(InsufficientData):
        exchangeability_check(np.zeros((5, 3)), 99, rng)
    with pytest.raises(InvalidInput):
        exchangeability_check(d, 99, None)
