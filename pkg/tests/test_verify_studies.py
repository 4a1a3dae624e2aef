from __future__ import annotations

import pytest

from beta_chains.boundary import BoundaryPoint
from beta_chains.errors import InsufficientData, InvalidInput
from beta_chains.studies import orbital_to_extremal, run_study, write_csv
from beta_chains.verify import OMEGA_BATTERY, SUITES, hard_edge_tail_quadrature, hp_battery_s, run_suite

SMALL = {
    "kernel-density": {"rows": 1, "n": 4000, "n_level2": 300, "N": [1, 2], "theta": [1.0], "sampler_theta": [1.0]},
    "bottom-entry": {"n": 2000, "N": [3], "theta": [1.0]},
    "exchangeability": {"n": 400, "theta": [1.0]},
    "extremal-charfn": {"n": 5000, "theta": [1.0]},
    "cumulants": {"n": 5000, "theta": [1.0]},
    "bessel-symmetry": {"n": 500, "cases": 2, "theta": [1.0]},
    "product-formula": {"n": 2000, "m": [1], "N": [2], "theta": [1.0]},
    "hp-consistency": {"n": 200, "permutations": 49, "theta": [1.0], "N": [2], "control_N": [3], "control_n": 200, "burn_in": 50},
    "iw-consistency": {"n": 200, "permutations": 49, "theta": [1.0], "N": [2], "control_N": [3], "control_n": 200},
    "hard-edge": {"n": 500, "quadrature_N": [2]},
    "theta-inf": {"N_max": 6},
    "ov-roundtrip": {},
}


def test_small_configs_cover_every_suite():
    assert set(SMALL) == set(SUITES)


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_smoke(name):
    rep = run_suite(name, SMALL[name], seed=1)
    assert rep["suite"] == name and rep["seed"] == 1 and rep["checks"]
    for c in rep["checks"]:
        assert set(c) == {"name", "value", "threshold", "pass"}


def test_unknown_suite_and_study():
    with pytest.raises(InvalidInput):
        run_suite("nope")
    with pytest.raises(InvalidInput):
        run_study("nope")


def test_battery_and_hp_s():
    assert len(OMEGA_BATTERY) == 6
    assert hp_battery_s(0.5) == 0.5 and hp_battery_s(1.0) == 0.0


def test_hard_edge_quadrature_is_exponential():
    import numpy as np

    for N in (2, 3):
        for t in (0.1, 0.6):
            assert hard_edge_tail_quadrature(N, t) == pytest.approx(np.exp(-2 * N * t), abs=1e-7)


def test_orbital_to_extremal_rows():
    om = BoundaryPoint([1.0], [], 0.5, 0.0)
    rows = orbital_to_extremal(om, 0.5, [20, 40, 80], 20_000, 0)
    assert [r.N for r in rows] == [20, 40, 80]
    assert rows[0].statistic > rows[-1].statistic
    slow = orbital_to_extremal(om, 0.5, [20], 2000, 0, method="orbital")
    assert slow[0].statistic < 0.2
    with pytest.raises(InvalidInput):
        orbital_to_extremal(om, 0.5, [20], 100, 0, method="magic")


def test_study_empty_levels(tmp_path):
    with pytest.raises(InsufficientData):
        run_study("hard-edge", {"levels": []})
    tables = run_study("hp-boundary", {"levels": [4, 8, 16], "n": 300, "burn_in": 50})
    path = tmp_path / "t.csv"
    write_csv(tables["top_k_rescaled"], str(path))
    assert path.read_text().splitlines()[0] == "N,statistic,error"
