from __future__ import annotations

import numpy as np
import pytest

from beta_chains.errors import InsufficientData, InvalidInput
from beta_chains.stats import (
    chunked_draws,
    ecdf,
    empirical_charfn,
    empirical_cumulants,
    energy_two_sample,
    ks_one_sample,
    ks_two_sample,
    make_rng,
    parallel_map,
    resolve_threads,
)


def test_make_rng_streams():
    a = make_rng(5, 1, 2).random(4)
    assert np.array_equal(a, make_rng(5, 1, 2).random(4))
    assert not np.array_equal(a, make_rng(5, 1, 3).random(4))
    with pytest.raises(InvalidInput):
        make_rng(None)
    with pytest.raises(InvalidInput):
        make_rng(-1)


def test_threads(monkeypatch):
    monkeypatch.delenv("BETA_CHAINS_THREADS", raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv("BETA_CHAINS_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    assert parallel_map(lambda k: k * k, range(7), 3) == [k * k for k in range(7)]


def test_chunked_draws_thread_independent():
    draw = lambda r, m: r.normal(size=m)
    a = chunked_draws(draw, 10_000, 3, chunk=777, threads=1)
    b = chunked_draws(draw, 10_000, 3, chunk=777, threads=4)
    assert a.tobytes() == b.tobytes()
    assert chunked_draws(draw, 0, 3).size == 0


def test_ks_examples(rng):
    x = rng.normal(size=100)
    assert ks_two_sample(x, x).statistic == 0.0
    assert ks_two_sample(np.zeros(10), np.ones(10)).statistic == 1.0
    assert ks_one_sample(rng.random(10_000), lambda t: np.clip(t, 0, 1)).p_value > 1e-4
    with pytest.raises(InsufficientData):
        ks_two_sample([], x)
    with pytest.raises(InvalidInput):
        ks_two_sample([np.nan], x)


def test_energy_power(rng):
    x = rng.normal(size=500)
    y = rng.normal(size=500) + 1.0
    r = energy_two_sample(x, y, 999, rng)
    assert r.rejects(0.001) and r.statistic > 0
    r = energy_two_sample(rng.normal(size=(300, 3)), rng.normal(size=(300, 3)), 199, rng)
    assert 0 <= r.p_value <= 1


def test_energy_null_calibration():
    ps = []
    for k in range(40):
        r = make_rng(77, k)
        ps.append(energy_two_sample(r.random(100), r.random(100), 99, r).p_value)
    ps = np.array(ps)
    # roughly uniform: not piled up at either end
    assert 0.3 < ps.mean() < 0.7
    assert np.mean(ps < 0.05) < 0.2


def test_cumulants_gaussian_and_gamma(rng):
    k, se = empirical_cumulants(rng.normal(size=200_000), 4)
    assert np.all(np.abs(k[2:]) < 4 * se[2:])
    x = rng.gamma(2.0, 1.0, size=400_000)
    k, se = empirical_cumulants(x, 4)
    ref = [2.0, 2.0, 4.0, 12.0]
    assert np.all(np.abs(k - ref) < 4 * se)
    with pytest.raises(InsufficientData):
        empirical_cumulants(np.arange(50.0), 4)


def test_ecdf_and_charfn(rng):
    v, h = ecdf([3.0, 1.0, 2.0])
    assert np.array_equal(v, [1, 2, 3]) and np.allclose(h, [1 / 3, 2 / 3, 1])
    x = rng.normal(size=5000)
    grid = np.array([0.0, 0.5])
    cf = empirical_charfn(x, grid)
    assert cf[0] == 1.0
    assert np.allclose(cf, np.mean(np.exp(1j * np.outer(grid, x)), axis=1))
