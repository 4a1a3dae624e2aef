from __future__ import annotations

import numpy as np
import pytest

from beta_chains.boundary import BoundaryPoint
from beta_chains.errors import InvalidInput, InvalidParameter
from beta_chains.extremal import (
    ExtremalDiagonalLaw,
    centered_gamma_sample,
    char_fn,
    cumulant,
    empirical_charfn_distance,
    extremal_diag_sample,
)
from beta_chains.stats import empirical_cumulants

# mpmath, omega = ((1), (), 0, 0), theta = 1, x = 1
CHARFN_ORACLE = 0.6908866453380181 - 0.15058433946987839j


def test_charfn_examples():
    x = np.linspace(-3, 3, 13)
    assert np.allclose(char_fn(BoundaryPoint([], [], 0.7, 0), 2.0, x), np.exp(0.7j * x))
    assert np.allclose(char_fn(BoundaryPoint([], [], 0, 1.3), 2.0, x), np.exp(-1.3 * x**2 / 4.0))
    v = char_fn(BoundaryPoint([1.0], [], 0, 0), 1.0, 1.0)
    assert v == pytest.approx(np.exp(-1j) / (1 - 1j), abs=1e-15)
    assert v == pytest.approx(CHARFN_ORACLE, abs=1e-15)
    assert abs(v) == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert np.allclose(char_fn(BoundaryPoint([1.0], [0.5], 0.3, 0.2), "inf", x), np.exp(0.3j * x))


def test_centered_gamma(rng):
    x = centered_gamma_sample(1.0, 2.0, rng, 1_000_000)
    assert abs(x.mean()) < 3 * 0.5 / 1000
    assert abs(x.var() - 0.25) < 4 * np.sqrt(8 / 16 / x.size)
    assert x.min() >= -0.5
    with pytest.raises(InvalidParameter):
        centered_gamma_sample(0.0, 1.0, rng)


def test_pure_gaussian_law(rng):
    om = BoundaryPoint([], [], 0.4, 0.6)
    x = extremal_diag_sample(ExtremalDiagonalLaw(om, 2.0), rng, 200_000)
    assert abs(x.mean() - 0.4) < 4 * np.sqrt(0.3 / x.size)
    assert x.var() == pytest.approx(0.6 / 2.0, rel=0.02)


def test_single_gamma_cumulants(rng):
    a, th = 0.8, 1.5
    om = BoundaryPoint([a], [], 0, 0)
    assert cumulant(om, th, 2) == pytest.approx(a**2 / th)
    assert cumulant(om, th, 3) == pytest.approx(2 * a**3 / th**2)
    x = extremal_diag_sample(ExtremalDiagonalLaw(om, th), rng, 400_000)
    k, se = empirical_cumulants(x, 3)
    assert abs(k[2] - 2 * a**3 / th**2) < 4 * se[2]


def test_theta_inf_is_dirac():
    om = BoundaryPoint([1.0], [0.3], -0.2, 0.5)
    law = ExtremalDiagonalLaw(om, "inf")
    assert extremal_diag_sample(law, None) == -0.2
    assert np.all(extremal_diag_sample(law, None, 10) == -0.2)
    with pytest.raises(InvalidInput):
        extremal_diag_sample(ExtremalDiagonalLaw(om, 1.0), None, 10)


def test_cumulant_examples():
    assert cumulant(BoundaryPoint([1.0], [], 1.0, 0), 1.0, 1) == 1.0
    assert cumulant(BoundaryPoint([1.0], [], 1.0, 0), 1.0, 2) == 1.0
    assert cumulant(BoundaryPoint([], [1.0], 0, 0), 1.0, 3) == -2.0
    assert all(cumulant(BoundaryPoint([], [], 0.3, 2.0), 0.7, p) == 0 for p in range(3, 8))


def test_law_strip_and_tail():
    law = ExtremalDiagonalLaw(BoundaryPoint([0.5, 0.25], [0.4], 0, 0), 2.0, K=1)
    assert law.strip_halfwidth == pytest.approx(4.0)
    assert law.tail_variance == pytest.approx(0.25**2 / 2.0)
    assert ExtremalDiagonalLaw(BoundaryPoint(), 1.0).strip_halfwidth == np.inf
    with pytest.raises(InvalidParameter):
        ExtremalDiagonalLaw(BoundaryPoint(), 1.0, tail_policy="keep")


def test_tail_policy_variance(rng):
    om = BoundaryPoint([0.6, 0.5], [], 0, 0)
    comp = extremal_diag_sample(ExtremalDiagonalLaw(om, 1.0, K=1), rng, 200_000)
    drop = extremal_diag_sample(ExtremalDiagonalLaw(om, 1.0, K=1, tail_policy="drop"), rng, 200_000)
    assert comp.var() == pytest.approx(0.61, rel=0.03)
    assert drop.var() == pytest.approx(0.36, rel=0.03)


def test_charfn_distance(rng):
    om = BoundaryPoint([1.0, 0.5], [0.8], 0.3, 0.5)
    x = extremal_diag_sample(ExtremalDiagonalLaw(om, 1.0), rng, 200_000)
    grid = np.linspace(-3, 3, 31)
    assert empirical_charfn_distance(x, om, 1.0, grid) < 0.02
    assert empirical_charfn_distance(x + 1.0, om, 1.0, grid) > 0.3
