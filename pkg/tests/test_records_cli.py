from __future__ import annotations

import csv
import hashlib
import json

import numpy as np
import pytest

from beta_chains import cli
from beta_chains.errors import InvalidInput
from beta_chains.records import generate_records, read_records, run_id_for, validate_spec, write_sample_run

OMEGA = {"alpha_plus": [1.0], "alpha_minus": [0.5], "gamma1": 0.2, "gamma2": 0.3}


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def test_validate_spec():
    validate_spec({"type": "orbital", "n": 3, "top": [1, 0], "theta": 1})
    validate_spec({"type": "kernel", "n": 3, "top": [1, 0], "theta": "inf"})
    for bad in (
        {"type": "orbital", "n": 3, "theta": 1},
        {"type": "ensemble", "n": 3, "kind": "HuaPickrell", "theta": 1},
        {"type": "cube", "n": 3},
        {"type": "kernel", "n": 0, "top": [1, 0], "theta": 1},
    ):
        with pytest.raises(InvalidInput):
            validate_spec(bad)


def test_run_id_stable():
    spec = {"type": "orbital", "n": 3, "top": [1, 0], "theta": 1}
    assert run_id_for(spec, 1) == run_id_for(dict(reversed(list(spec.items()))), 1)
    assert run_id_for(spec, 1) != run_id_for(spec, 2)


@pytest.mark.parametrize(
    "spec",
    [
        {"type": "kernel", "n": 300, "top": [2.0, 0.5, -1.0], "theta": 0.5},
        {"type": "orbital", "n": 300, "top": [2.0, 0.5, -1.0], "theta": 2.0},
        {"type": "ensemble", "n": 50, "kind": "HuaPickrell", "N": 2, "theta": 1.0, "s": [0.2, 0.1], "burn_in": 50},
        {"type": "ensemble", "n": 50, "kind": "InverseWishart", "N": 2, "theta": 1.0, "tau": 0.5},
        {"type": "extremal-diag", "n": 1000, "omega": OMEGA, "theta": 1.0},
    ],
)
def test_records_deterministic_across_threads(tmp_path, spec):
    a = write_sample_run(spec, 11, str(tmp_path / "a"), threads=1)
    b = write_sample_run(spec, 11, str(tmp_path / "b"), threads=3)
    assert _digest(a.records) == _digest(b.records)
    recs = list(read_records(a.records))
    assert all(r["seed"] == 11 for r in recs)
    if spec["type"] == "extremal-diag":
        assert sum(len(r["diag"]) for r in recs) == 1000
    else:
        assert len(recs) == spec["n"]


def test_record_chunks_thread_independent():
    spec = {"type": "orbital", "n": 50, "top": [1.0, 0.0, -1.0], "theta": 1.0}
    a = list(generate_records(spec, 4, threads=1, chunk=7))
    b = list(generate_records(spec, 4, threads=4, chunk=7))
    assert a == b


def test_orbital_record_contents(tmp_path):
    run = write_sample_run({"type": "orbital", "n": 20, "top": [1.0, 0.0], "theta": 1.0}, 0, str(tmp_path))
    for r in read_records(run.records):
        assert r["top"] == [1.0, 0.0]
        assert len(r["rows"]) == 2 and r["rows"][1] == [1.0, 0.0]
        assert r["diag"][0] == r["rows"][0][0]
        assert sum(r["diag"]) == pytest.approx(1.0)
    meta = json.loads((tmp_path / f"{run.run_id}.run.json").read_text())
    assert meta["summary"]["records"] == 20 and meta["seed"] == 0


def test_cli_sample_orbital_replay(tmp_path, capsys):
    args = ["sample", "orbital", "--top", "1,0", "--theta", "1", "--n", "1e4", "--seed", "7", "--out", str(tmp_path)]
    assert cli.run(args) == 0
    rid = capsys.readouterr().out.strip()
    first = _digest(tmp_path / f"{rid}.jsonl")
    assert sum(1 for _ in read_records(str(tmp_path / f"{rid}.jsonl"))) == 10_000
    assert cli.run(args + ["--threads", "2"]) == 0
    assert capsys.readouterr().out.strip() == rid
    assert _digest(tmp_path / f"{rid}.jsonl") == first


def test_cli_sample_extremal(tmp_path, capsys):
    om = tmp_path / "omega.json"
    om.write_text(json.dumps(OMEGA))
    assert cli.run(["--seed", "3", "sample", "extremal-diag", "--omega", str(om), "--theta", "2", "--n", "1e5", "--out", str(tmp_path)]) == 0
    rid = capsys.readouterr().out.strip()
    x = np.concatenate([r["diag"] for r in read_records(str(tmp_path / f"{rid}.jsonl"))])
    assert x.size == 100_000
    assert abs(x.mean() - 0.2) < 0.02


def test_cli_verify_and_config(tmp_path, capsys):
    assert cli.run(["verify", "theta-inf", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "verify-theta-inf.json").read_text())
    assert rep["suite"] == "theta-inf" and all(c["pass"] for c in rep["checks"])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "N_max": 8, "tolerances": {"eval_rel": 1e-8}}))
    assert cli.run(["verify", "theta-inf", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "verify-theta-inf.json").read_text())["seed"] == 5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tolerances": {"nope": 1}}))
    assert cli.run(["verify", "theta-inf", "--config", str(bad), "--out", str(tmp_path)]) == 2
    capsys.readouterr()


def test_cli_verify_failing_check_exit_1(tmp_path, capsys):
    # an unattainable round-trip tolerance makes some check fail
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tol": 1e-12}))
    assert cli.run(["verify", "ov-roundtrip", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    capsys.readouterr()


def test_cli_product_formula_example(tmp_path, capsys):
    assert cli.run(["verify", "product-formula", "--m", "1", "--N", "2", "--theta", "1", "--n", "1e5", "--out", str(tmp_path)]) == 0
    capsys.readouterr()


def test_cli_study_hard_edge(tmp_path, capsys):
    assert cli.run(["study", "hard-edge", "--theta", "1", "--tau", "0", "--levels", "2,10,50", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "hard-edge-hard_edge.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["N"]) for r in rows] == [2, 10, 50]
    assert all(float(r["statistic"]) < 0.02 for r in rows)
    capsys.readouterr()


def test_cli_study_orbital_to_extremal(tmp_path, capsys):
    om = tmp_path / "omega.json"
    om.write_text(json.dumps({"alpha_plus": [1.0], "alpha_minus": [], "gamma1": 0.5, "gamma2": 0.0}))
    args = ["study", "orbital-to-extremal", "--omega", str(om), "--theta", "0.5", "--levels", "100,200,400", "--out", str(tmp_path)]
    assert cli.run(args) == 0
    with open(tmp_path / "orbital-to-extremal-ks.csv") as fh:
        ks = [float(r["statistic"]) for r in csv.DictReader(fh)]
    assert ks[0] > ks[1] > ks[2]
    capsys.readouterr()


@pytest.mark.parametrize(
    "args",
    [
        ["study", "hard-edge", "--levels", ""],
        ["verify", "no-such-suite"],
        ["sample", "orbital", "--theta", "1", "--n", "10"],
        ["sample", "orbital", "--top", "1,x", "--theta", "1", "--n", "10"],
        ["frobnicate"],
        ["sample", "kernel", "--top", "1,0", "--theta", "-1", "--n", "5"],
    ],
)
def test_cli_usage_errors(tmp_path, capsys, args):
    assert cli.run(args + ["--out", str(tmp_path)]) == 2
    capsys.readouterr()


def test_cli_help_exit_zero(capsys):
    assert cli.run(["--help"]) == 0
    assert "beta-chains" in capsys.readouterr().out
