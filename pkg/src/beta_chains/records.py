"""Sample runs persisted as JSON-lines records plus a JSON run file.

Every record has the fields ``{seed, theta, top, rows, diag}``. Orbital and
kernel records hold one array each. Ensemble records hold one row
(``top`` and ``rows[0]``). Extremal-diagonal runs store one record per RNG
chunk, with the draws in ``diag``. The record file depends only on
``(spec, seed)``; the wall-clock timestamp lives in the run file.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional

import jsonschema
import numpy as np

from .boundary import BOUNDARY_POINT_SCHEMA, BoundaryPoint
from .errors import InvalidInput
from .extremal import ExtremalDiagonalLaw, extremal_diag_sample
from .ensembles import ChainConfig, EnsembleSpec, ensemble_sample
from .kernels import WeylPoint, as_theta, dixon_anderson_sample_batch
from .orbital import orbital_sample_batch
from .stats import DEFAULT_CHUNK, make_rng, parallel_map

__all__ = [
    "SAMPLE_SPEC_SCHEMA",
    "SampleRun",
    "run_id_for",
    "generate_records",
    "write_sample_run",
    "read_records",
]

_theta_schema = {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"const": "inf"}]}

SAMPLE_SPEC_SCHEMA = {
    "type": "object",
    "required": ["type", "n"],
    "properties": {
        "type": {"enum": ["kernel", "orbital", "ensemble", "extremal-diag"]},
        "n": {"type": "integer", "minimum": 1},
        "theta": _theta_schema,
        "top": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "omega": BOUNDARY_POINT_SCHEMA,
        "K": {"type": ["integer", "null"], "minimum": 0},
        "tail_policy": {"enum": ["drop", "gaussian_compensate"]},
        "kind": {"enum": ["HuaPickrell", "InverseWishart"]},
        "N": {"type": "integer", "minimum": 1},
        "s": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "tau": {"type": "number"},
        "sampler": {"enum": ["auto", "mcmc", "oracle"]},
        "burn_in": {"type": "integer", "minimum": 0},
    },
    "allOf": [
        {"if": {"properties": {"type": {"enum": ["kernel", "orbital"]}}}, "then": {"required": ["top", "theta"]}},
        {"if": {"properties": {"type": {"const": "ensemble"}}}, "then": {"required": ["kind", "N", "theta"]}},
        {"if": {"properties": {"type": {"const": "extremal-diag"}}}, "then": {"required": ["omega", "theta"]}},
    ],
}


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def run_id_for(spec: dict, seed: int) -> str:
    """Content hash of ``(spec, seed)``."""
    return hashlib.sha256(_canonical({"spec": spec, "seed": int(seed)}).encode()).hexdigest()[:16]


def validate_spec(spec: dict) -> dict:
    try:
        jsonschema.validate(spec, SAMPLE_SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidInput(f"invalid sample spec: {exc.message}") from exc
    return spec


def _chunks(n: int, chunk: int) -> List[int]:
    return [min(chunk, n - start) for start in range(0, n, chunk)]


def _chunk_records(spec: dict, seed: int, k: int, size: int) -> List[dict]:
    rng = make_rng(seed, 0, k)
    kind = spec["type"]
    theta = spec.get("theta")
    if kind == "kernel":
        b = WeylPoint(spec["top"]).points
        a = dixon_anderson_sample_batch(np.tile(b, (size, 1)), theta, rng)
        d = b.sum() - a.sum(axis=1)
        return [
            {"seed": seed, "theta": theta, "top": b.tolist(), "rows": [a[i].tolist()], "diag": [float(d[i])]}
            for i in range(size)
        ]
    if kind == "orbital":
        top = WeylPoint(spec["top"]).points
        batch = orbital_sample_batch(top, theta, size, rng)
        d = batch.diagonal_entries()
        return [
            {
                "seed": seed,
                "theta": theta,
                "top": top.tolist(),
                "rows": [r[i].tolist() for r in batch.rows],
                "diag": d[i].tolist(),
            }
            for i in range(size)
        ]
    if kind == "ensemble":
        es = _ensemble_spec(spec)
        cfg = ChainConfig.parallel(size, int(spec.get("burn_in", 400)))
        pts = ensemble_sample(es, size, rng, spec.get("sampler", "auto"), cfg).points
        return [{"seed": seed, "theta": theta, "top": p.tolist(), "rows": [p.tolist()], "diag": None} for p in pts]
    if kind == "extremal-diag":
        law = _extremal_law(spec)
        x = extremal_diag_sample(law, rng, size)
        return [{"seed": seed, "theta": theta, "top": None, "rows": None, "diag": np.asarray(x, dtype=float).tolist()}]
    raise InvalidInput(f"unknown sample type {kind!r}")


def _ensemble_spec(spec: dict) -> EnsembleSpec:
    s = spec.get("s", [0.0, 0.0])
    return EnsembleSpec(spec["kind"], spec["theta"], spec["N"], s=complex(s[0], s[1]), tau=spec.get("tau", 0.0))


def _extremal_law(spec: dict) -> ExtremalDiagonalLaw:
    return ExtremalDiagonalLaw(
        BoundaryPoint.from_dict(spec["omega"]),
        as_theta(spec["theta"]),
        spec.get("K"),
        spec.get("tail_policy", "gaussian_compensate"),
    )


def generate_records(spec: dict, seed: int, threads: Optional[int] = None, chunk: Optional[int] = None) -> Iterator[dict]:
    """Records of a run, chunk by chunk; independent of ``threads``.

    Ensemble chunks hold one parallel-chain batch each, so the default chunk
    for them is smaller to keep memory low.
    """
    validate_spec(spec)
    seed = int(seed)
    if chunk is None:
        chunk = DEFAULT_CHUNK if spec["type"] != "ensemble" else 2048
    sizes = _chunks(int(spec["n"]), chunk)
    # bounded groups keep memory flat for long runs
    group = max(1, 4 * (threads or 1))
    for g0 in range(0, len(sizes), group):
        ks = range(g0, min(g0 + group, len(sizes)))
        for recs in parallel_map(lambda k: _chunk_records(spec, seed, k, sizes[k]), ks, threads):
            yield from recs


@dataclass
class SampleRun:
    run_id: str
    created_at: str
    spec: dict
    seed: int
    records: str
    summary: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "spec": self.spec,
            "seed": self.seed,
            "records": self.records,
            "summary": self.summary,
        }


class _Moments:
    """Streaming mean and variance per diagonal coordinate."""

    def __init__(self):
        self.n = 0
        self.s1: Optional[np.ndarray] = None
        self.s2: Optional[np.ndarray] = None

    def add(self, x: np.ndarray):
        x = np.atleast_2d(x)
        if self.s1 is None:
            self.s1 = np.zeros(x.shape[1])
            self.s2 = np.zeros(x.shape[1])
        self.n += x.shape[0]
        self.s1 += x.sum(axis=0)
        self.s2 += (x**2).sum(axis=0)

    def to_dict(self) -> dict:
        if self.n == 0:
            return {}
        mean = self.s1 / self.n
        var = np.maximum(self.s2 / self.n - mean**2, 0.0)
        return {"count": self.n, "mean": mean.tolist(), "var": var.tolist()}


def write_sample_run(spec: dict, seed: int, out_dir: str, threads: Optional[int] = None) -> SampleRun:
    """Write ``<run_id>.jsonl`` and ``<run_id>.run.json`` into ``out_dir``."""
    validate_spec(spec)
    os.makedirs(out_dir, exist_ok=True)
    rid = run_id_for(spec, seed)
    path = os.path.join(out_dir, f"{rid}.jsonl")
    mom = _Moments()
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in generate_records(spec, seed, threads):
            fh.write(_canonical(rec) + "\n")
            count += 1
            if spec["type"] == "extremal-diag":
                mom.add(np.asarray(rec["diag"])[:, None])
            elif spec["type"] == "ensemble":
                mom.add(np.asarray(rec["top"]))
            else:
                mom.add(np.asarray(rec["diag"]))
    summary = {"records": count, "moments": mom.to_dict()}
    run = SampleRun(rid, datetime.datetime.now(datetime.timezone.utc).isoformat(), spec, int(seed), path, summary)
    with open(os.path.join(out_dir, f"{rid}.run.json"), "w", encoding="utf-8") as fh:
        json.dump(run.to_dict(), fh, indent=2, sort_keys=True)
    return run


def read_records(path: str) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield json.loads(line)
