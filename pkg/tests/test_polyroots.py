from __future__ import annotations

import itertools

import numpy as np
import pytest

from beta_chains.errors import InvalidInput, NotRealRooted
from beta_chains.polyroots import (
    RealRootedPoly,
    derivative,
    elementary_to_power_sums,
    evaluate,
    hermite,
    hermite_zeros,
    poly_from_roots,
    power_sums_to_elementary,
    real_roots,
)


def test_poly_from_roots_examples():
    assert np.array_equal(poly_from_roots([1, -1]).coeffs, [1, 0, -1])
    assert np.array_equal(poly_from_roots([0.7]).coeffs, [1, -0.7])
    assert np.allclose(poly_from_roots([2, 2, 2]).coeffs, [1, -6, 12, -8], atol=0)


def test_poly_from_roots_caches_sorted_roots():
    p = poly_from_roots([-1.0, 3.0, 0.5])
    assert np.array_equal(p.roots, [3.0, 0.5, -1.0])
    assert np.all(np.abs(evaluate(p, p.roots)) < 1e-12)


def test_monic_required():
    with pytest.raises(InvalidInput):
        RealRootedPoly(np.array([2.0, 1.0]))
    with pytest.raises(InvalidInput):
        RealRootedPoly(np.array([1.0, np.nan]))


def test_real_roots_examples():
    assert np.allclose(real_roots(RealRootedPoly(np.array([1.0, 0.0, -1.0]))), [1, -1], atol=1e-14)
    r = real_roots(RealRootedPoly(np.array([1.0, -6.0, 12.0, -8.0])))
    assert np.max(np.abs(r - 2.0)) < 1e-5
    r = real_roots(RealRootedPoly(np.array([1.0, 0.0, -3.0, 0.0])))
    assert np.allclose(r, [np.sqrt(3), 0, -np.sqrt(3)], atol=1e-13)


def test_real_roots_rejects_complex():
    with pytest.raises(NotRealRooted):
        real_roots(RealRootedPoly(np.array([1.0, 0.0, 1.0])))


def test_real_roots_uncached_random(rng):
    for _ in range(20):
        roots = np.sort(rng.uniform(-5, 5, size=int(rng.integers(1, 9))))[::-1]
        p = RealRootedPoly(poly_from_roots(roots).coeffs)
        assert np.allclose(real_roots(p), roots, atol=1e-7)


def test_real_roots_wide_scale():
    roots = np.array([1e3, 2.0, -5e2])
    p = RealRootedPoly(poly_from_roots(roots).coeffs)
    assert np.allclose(real_roots(p), roots, rtol=1e-10)


def test_derivative_examples():
    assert np.array_equal(derivative(RealRootedPoly(np.array([1.0, 0.0, -1.0]))).coeffs, [1, 0])
    assert np.allclose(derivative(RealRootedPoly(np.array([1.0, 0.0, -3.0, 0.0]))).coeffs, [1, 0, -1])
    c = 1.5
    for N in range(2, 7):
        d = derivative(poly_from_roots([c] * N))
        assert np.allclose(d.coeffs, poly_from_roots([c] * (N - 1)).coeffs, rtol=1e-12)


def test_derivative_raw_keeps_leading_coefficient():
    d = derivative(RealRootedPoly(np.array([1.0, 0.0, -3.0, 0.0])), normalize_monic=False)
    assert np.array_equal(d.coeffs, [3.0, 0.0, -3.0])


def test_newton_identities_examples():
    assert np.allclose(power_sums_to_elementary([0, 2]), [0, -1])
    assert np.allclose(power_sums_to_elementary([0.4]), [0.4])
    assert np.allclose(power_sums_to_elementary([3, 5, 9]), [3, 2, 0])
    assert np.allclose(elementary_to_power_sums([0, -1]), [0, 2])
    assert np.allclose(elementary_to_power_sums([6, 12, 8]), [6, 12, 24])


def _brute_elementary(roots, K):
    return np.array([sum(np.prod(c) for c in itertools.combinations(roots, k)) for k in range(1, K + 1)])


def test_newton_identities_brute_force(rng):
    for size in range(1, 6):
        roots = rng.normal(size=size)
        s = np.array([np.sum(roots**p) for p in range(1, size + 1)])
        assert np.allclose(power_sums_to_elementary(s), _brute_elementary(roots, size), atol=1e-12)


def test_hermite_examples():
    assert np.array_equal(hermite(1).coeffs, [1, 0])
    assert np.array_equal(hermite(2).coeffs, [1, 0, -1])
    assert np.array_equal(hermite(3).coeffs, [1, 0, -3, 0])
    assert np.allclose(hermite_zeros(3), [np.sqrt(3), 0, -np.sqrt(3)], atol=1e-14)


def test_hermite_zeros_match_numpy():
    for N in (5, 12, 30):
        ref = np.sort(np.polynomial.hermite_e.hermegauss(N)[0])[::-1]
        assert np.max(np.abs(hermite_zeros(N) - ref)) < 1e-10
