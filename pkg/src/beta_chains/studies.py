"""Convergence studies emitting ``(N, statistic, error)`` tables."""
from __future__ import annotations

import csv
import os
from typing import Dict, List, Optional

import numpy as np

from .boundary import BoundaryPoint, construct_ov_sequence
from .ensembles import HUA_PICKRELL, INVERSE_WISHART, EnsembleSpec, StudyRow, boundary_convergence_study
from .errors import InsufficientData, InvalidInput
from .extremal import ExtremalDiagonalLaw, extremal_diag_sample
from .orbital import bottom_entry_dirichlet_sample, orbital_sample_batch
from .stats import ks_two_sample, make_rng

__all__ = ["STUDIES", "orbital_to_extremal", "run_study", "write_csv"]


def _levels(cfg: dict) -> List[int]:
    levels = cfg.get("levels")
    if not levels:
        raise InsufficientData("the level list is empty")
    return [int(N) for N in levels]


def orbital_to_extremal(
    omega: BoundaryPoint,
    theta: float,
    levels,
    n: int,
    seed: int,
    prefix: Optional[int] = None,
    method: str = "dirichlet",
) -> List[StudyRow]:
    """KS distance between level-1 entries under O-V top rows and ``M_omega``.

    The top row at level ``N`` is ``construct_ov_sequence(omega, N, prefix)``;
    ``prefix`` defaults to the number of stored alphas so every alpha is placed
    explicitly. ``method="dirichlet"`` draws the bottom entry in one step as a
    Dirichlet mixture of the top row; ``"orbital"`` runs the full chain of
    kernel steps.
    """
    if prefix is None:
        prefix = max(omega.alpha_plus.size, omega.alpha_minus.size)
    law = ExtremalDiagonalLaw(omega, theta)
    ref = extremal_diag_sample(law, make_rng(seed, 20), n)
    rows = []
    for N in levels:
        rng = make_rng(seed, 21, int(N))
        top = construct_ov_sequence(omega, int(N), prefix)
        if method == "dirichlet":
            x = bottom_entry_dirichlet_sample(top, theta, rng, size=n)
        elif method == "orbital":
            x = orbital_sample_batch(top, theta, n, rng).rows[0][:, 0]
        else:
            raise InvalidInput(f"unknown method {method!r}")
        ks = ks_two_sample(x, ref).statistic
        rows.append(StudyRow(int(N), float(ks), float(np.sqrt(-0.5 * np.log(0.025) * 2.0 / n))))
    return rows


def _study_hp_boundary(cfg: dict, seed: int) -> Dict[str, List[StudyRow]]:
    th = float(cfg.get("theta", 1.0))
    s = cfg.get("s", 0.0)
    s = complex(s[0], s[1]) if isinstance(s, (list, tuple)) else complex(s)
    spec = EnsembleSpec(HUA_PICKRELL, th, 1, s=s)
    levels = _levels(dict(cfg, levels=cfg.get("levels", [8, 16, 32, 64])))
    n = int(cfg.get("n", 4000))
    out = {}
    for obs in cfg.get("observables", ["top_k_rescaled"]):
        out[obs] = boundary_convergence_study(spec, levels, obs, n, make_rng(seed, 22), int(cfg.get("burn_in", 400)))
    return out


def _study_hard_edge(cfg: dict, seed: int) -> Dict[str, List[StudyRow]]:
    th = float(cfg.get("theta", 1.0))
    spec = EnsembleSpec(INVERSE_WISHART, th, 1, tau=float(cfg.get("tau", 0.0)))
    levels = _levels(dict(cfg, levels=cfg.get("levels", [2, 10, 50])))
    n = int(cfg.get("n", 5000))
    return {"hard_edge": boundary_convergence_study(spec, levels, "hard_edge", n, make_rng(seed, 23))}


def _study_orbital_to_extremal(cfg: dict, seed: int) -> Dict[str, List[StudyRow]]:
    om = cfg.get("omega")
    if om is None:
        raise InvalidInput("orbital-to-extremal needs an omega")
    om = om if isinstance(om, BoundaryPoint) else BoundaryPoint.from_dict(om)
    levels = _levels(dict(cfg, levels=cfg.get("levels", [100, 200, 400])))
    rows = orbital_to_extremal(
        om,
        float(cfg.get("theta", 1.0)),
        levels,
        int(cfg.get("n", 100_000)),
        seed,
        cfg.get("prefix"),
        cfg.get("method", "dirichlet"),
    )
    return {"ks": rows}


STUDIES = {
    "hp-boundary": _study_hp_boundary,
    "hard-edge": _study_hard_edge,
    "orbital-to-extremal": _study_orbital_to_extremal,
}


def run_study(name: str, cfg: Optional[dict] = None, seed: int = 0) -> Dict[str, List[StudyRow]]:
    if name not in STUDIES:
        raise InvalidInput(f"unknown study {name!r}; choose from {sorted(STUDIES)}")
    return STUDIES[name](dict(cfg or {}), int(seed))


def write_csv(rows: List[StudyRow], path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "statistic", "error"])
        for r in rows:
            w.writerow([r.N, repr(r.statistic), repr(r.error)])
