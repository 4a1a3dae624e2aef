"""Command-line entry point: ``beta-chains <sample|verify|study> ...``.

Exit codes: 0 success (all checks pass), 1 some verification check failed,
2 usage or schema error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import jsonschema

from .config import reset_tolerances, set_tolerances
from .errors import BetaChainsError
from .records import write_sample_run
from .stats import resolve_threads
from .studies import STUDIES, run_study, write_csv
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

SAMPLE_KINDS = ("kernel", "orbital", "ensemble", "extremal-diag")


class UsageError(Exception):
    pass


def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> List[int]:
    return [int(v) for v in _floats(text)]


def _theta(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return "inf"
    return float(text)


def _count(text: str) -> int:
    # accepts 1e6-style counts
    v = float(text)
    if v != int(v):
        raise UsageError(f"count must be an integer, got {text!r}")
    return int(v)


def _complex_pair(text: str) -> List[float]:
    v = _floats(text)
    if len(v) == 1:
        v.append(0.0)
    if len(v) != 2:
        raise UsageError("s takes 're' or 're,im'")
    return v


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="integer seed (default 0)")
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON config; flags override its keys")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default ./out)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (env BETA_CHAINS_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beta-chains", description=__doc__.splitlines()[0])
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sample", help="draw and persist a sample run")
    ps.add_argument("kind", choices=SAMPLE_KINDS)
    ps.add_argument("--top", help="top row, comma-separated")
    ps.add_argument("--theta", help="beta/2; 'inf' allowed for kernel, orbital, extremal-diag")
    ps.add_argument("--n", help="number of draws (1e6 style accepted)")
    ps.add_argument("--omega", help="BoundaryPoint JSON file")
    ps.add_argument("--K", type=int, help="explicit gamma terms for extremal-diag")
    ps.add_argument("--tail-policy", choices=("drop", "gaussian_compensate"))
    ps.add_argument("--ensemble", choices=("HuaPickrell", "InverseWishart"), help="ensemble family")
    ps.add_argument("--N", type=int, help="ensemble level")
    ps.add_argument("--s", help="Hua-Pickrell s as 're' or 're,im'")
    ps.add_argument("--tau", type=float)
    ps.add_argument("--sampler", choices=("auto", "mcmc", "oracle"))
    _common(ps)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite")
    _suite_flags(pv)
    _common(pv)

    pt = sub.add_parser("study", help="run a convergence study and write CSV tables")
    pt.add_argument("study")
    _suite_flags(pt)
    _common(pt)
    return parser


def _suite_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta", help="theta, or a comma-separated list")
    p.add_argument("--N", help="level, or a comma-separated list")
    p.add_argument("--m", help="product-formula m, or a list")
    p.add_argument("--s", help="Hua-Pickrell s as 're' or 're,im'")
    p.add_argument("--tau", type=float)
    p.add_argument("--n", help="sample size")
    p.add_argument("--levels", help="comma-separated levels")
    p.add_argument("--omega", help="BoundaryPoint JSON file")


def _one_or_list(values):
    return values[0] if len(values) == 1 else values


def _sample_spec(args, cfg: dict) -> dict:
    spec = {k: v for k, v in cfg.items() if k not in ("tolerances", "seed", "out", "threads")}
    spec["type"] = args.kind
    if args.top is not None:
        spec["top"] = _floats(args.top)
    if args.theta is not None:
        spec["theta"] = _theta(args.theta)
    if args.n is not None:
        spec["n"] = _count(args.n)
    if args.omega is not None:
        spec["omega"] = _load_json(args.omega)
    if args.K is not None:
        spec["K"] = args.K
    if args.tail_policy is not None:
        spec["tail_policy"] = args.tail_policy
    if args.ensemble is not None:
        spec["kind"] = args.ensemble
    if args.N is not None:
        spec["N"] = args.N
    if args.s is not None:
        spec["s"] = _complex_pair(args.s)
    if args.tau is not None:
        spec["tau"] = args.tau
    if args.sampler is not None:
        spec["sampler"] = args.sampler
    if isinstance(spec.get("s"), (int, float)):
        spec["s"] = [float(spec["s"]), 0.0]
    return spec


def _suite_cfg(args, cfg: dict) -> dict:
    out = {k: v for k, v in cfg.items() if k not in ("tolerances", "seed", "out", "threads")}
    if args.theta is not None:
        out["theta"] = _one_or_list(_floats(args.theta))
    if args.N is not None:
        out["N"] = _one_or_list(_ints(args.N))
    if args.m is not None:
        out["m"] = _one_or_list(_ints(args.m))
    if args.s is not None:
        s = _complex_pair(args.s)
        out["s"] = s if s[1] != 0 else s[0]
    if args.tau is not None:
        out["tau"] = args.tau
    if args.n is not None:
        out["n"] = _count(args.n)
    if args.levels is not None:
        out["levels"] = _ints(args.levels)
    if args.omega is not None:
        out["omega"] = _load_json(args.omega)
    return out


def _write_json(obj, path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    reset_tolerances()
    try:
        cfg = _load_json(args.config) if getattr(args, "config", None) else {}
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        if cfg.get("tolerances"):
            try:
                set_tolerances(**cfg["tolerances"])
            except KeyError as exc:
                raise UsageError(str(exc)) from exc
        seed = int(getattr(args, "seed", cfg.get("seed", 0)))
        out = getattr(args, "out", cfg.get("out", "out"))
        threads = resolve_threads(getattr(args, "threads", cfg.get("threads")))

        if args.command == "sample":
            spec = _sample_spec(args, cfg)
            run_ = write_sample_run(spec, seed, out, threads)
            print(run_.run_id)
            return EXIT_OK
        if args.command == "verify":
            if args.suite not in SUITES:
                raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(SUITES))}")
            report = run_suite(args.suite, _suite_cfg(args, cfg), seed)
            _write_json(report, os.path.join(out, f"verify-{args.suite}.json"))
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK if all(c["pass"] for c in report["checks"]) else EXIT_FAILED
        if args.command == "study":
            if args.study not in STUDIES:
                raise UsageError(f"unknown study {args.study!r}; choose from {', '.join(sorted(STUDIES))}")
            tables = run_study(args.study, _suite_cfg(args, cfg), seed)
            for obs, rows in tables.items():
                path = os.path.join(out, f"{args.study}-{obs}.csv")
                write_csv(rows, path)
                print(path)
                for r in rows:
                    print(f"  N={r.N} statistic={r.statistic:.6g} error={r.error:.3g}")
            return EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except jsonschema.ValidationError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (BetaChainsError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
