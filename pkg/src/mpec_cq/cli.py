"""Command-line front end.

One subcommand per workflow; every invocation emits either a human-readable
text report or exactly one JSON document embedding the resolved run
configuration.  Exit codes are a pure function of the top-level verdict:
0 HOLDS/neutral, 1 FAILS-type finding, 2 UNKNOWN/inconclusive, 64 usage or
parse errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .certify import Status, certify_mscq_mpec
from .exactmath import DimensionMismatch as VectorDimensionMismatch
from .exactmath import vec
from .lowerlevel import (
    DirectionNotCritical,
    InfeasiblePoint,
    LpUnbounded,
    NoMultiplier,
    critical_cone,
    graph_tangent_member,
    graph_tangent_slice,
    min_norm_multiplier,
    multiplier_set,
)
from .model import DimensionMismatch, ParseError, load_problem
from .mpccdiag import (
    DirectionNotInLinCone,
    MissingObjective,
    gcq_evidence,
    mpcc_index_sets,
    mpcc_licq_check,
    mpcc_mfcq_check,
    mpec_linearized_cone,
    multiplier_uniqueness,
    stationarity_check,
)
from .oracle import (
    BaseNotOnGraph,
    dist_mpcc,
    error_bound_probe_mpec,
    tangent_ratio_probe,
)

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: str
    lam: tuple | None = None
    depth: int = 12
    budget: int = 200
    seed: int = 0
    threads: int = 1
    vanish_tol: float = 1e-3
    away_tol: float = 1e-2
    output: str = "text"

    def to_json_dict(self) -> dict:
        d = {"command": self.command, "problem": self.problem,
             "depth": self.depth, "budget": self.budget, "seed": self.seed,
             "threads": self.threads, "vanish_tol": self.vanish_tol,
             "away_tol": self.away_tol, "output": self.output}
        if self.lam is not None:
            d["lambda"] = [str(x) for x in self.lam]
        return d


def _rational_csv(text: str) -> tuple:
    try:
        return vec([tok.strip() for tok in text.split(",") if tok.strip()])
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad rational vector {text!r}: {exc}")


def _one_based(indices) -> list:
    return [i + 1 for i in indices]


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mpec-cq",
        description="Exact certification of constraint qualifications for "
                    "MPECs, with floating-point cross-validation probes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_lambda=False):
        p.add_argument("problem", help="problem file (TOML)")
        p.add_argument("--json", action="store_true", help="emit one JSON document")
        p.add_argument("--depth", type=int, default=12,
                       help="subdivision depth limit (default 12)")
        p.add_argument("--budget", type=int, default=200,
                       help="oracle multistart budget (default 200)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("MPEC_CQ_THREADS", "1")),
                       help="worker cap; never changes results")
        p.add_argument("--vanish-tol", type=float, default=1e-3)
        p.add_argument("--away-tol", type=float, default=1e-2)
        if needs_lambda:
            p.add_argument("--lambda", dest="lam", type=_rational_csv,
                           required=True,
                           help="multiplier, comma-separated rationals "
                                "like 1/2,1/2")

    common(sub.add_parser("validate", help="check the reference point"))
    common(sub.add_parser("analyze",
                          help="multiplier polyhedron, extreme points, "
                               "critical cone, uniqueness"))
    p = sub.add_parser("tangent-cone",
                       help="graph tangent slice T(v) or membership of (v, v*)")
    common(p)
    p.add_argument("--v", type=_rational_csv, required=True)
    p.add_argument("--vstar", type=_rational_csv)
    common(sub.add_parser("certify-mscq",
                          help="sufficient-condition certifier for MSCQ"))
    p = sub.add_parser("diagnose-mpcc",
                       help="index sets, MPCC-MFCQ/LICQ, linearized cone, "
                            "stationarity")
    common(p, needs_lambda=True)
    p = sub.add_parser("probe", help="floating-point oracle probes")
    common(p)
    p.add_argument("--mode", choices=["graph", "mpcc", "error-bound"],
                   default="graph")
    p.add_argument("--lambda", dest="lam", type=_rational_csv)
    p.add_argument("--base", type=_rational_csv,
                   help="base point (y, y*) for graph mode")
    p.add_argument("--direction", type=_rational_csv)
    p.add_argument("--point", type=_rational_csv,
                   help="query point (x, y, lambda) for mpcc mode")
    return ap


def _emit(payload: dict, config: RunConfig, exit_code: int) -> int:
    if config.output == "json":
        doc = {"command": config.command, "problem": config.problem,
               "config": config.to_json_dict(), "result": payload,
               "exit_code": exit_code}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        _print_text(payload, config)
    return exit_code


def _print_text(payload: dict, config: RunConfig, indent: int = 0) -> None:
    pad = "  " * indent
    for key, value in payload.items():
        if isinstance(value, dict):
            print(f"{pad}{key}:")
            _print_text(value, config, indent + 1)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            print(f"{pad}{key}:")
            for item in value:
                _print_text(item, config, indent + 1)
                print()
        else:
            print(f"{pad}{key}: {value}")


def _status_exit(status: str) -> int:
    return {"HOLDS": EXIT_OK, "FAILS": EXIT_FINDING,
            "UNKNOWN": EXIT_UNKNOWN}[status]


def _run_validate(problem, cfg: RunConfig) -> int:
    from .model import validate_point
    rep = validate_point(problem)
    payload = {
        "g_values": [str(v) for v in rep.g_values],
        "G_values": [str(v) for v in rep.G_values],
        "lower_feasible": rep.lower_feasible,
        "upper_feasible": rep.upper_feasible,
        "ystar": [str(v) for v in rep.ystar],
        "multiplier_feasible": rep.multiplier_feasible,
        "ok": rep.ok,
    }
    return _emit(payload, cfg, EXIT_OK if rep.ok else EXIT_FINDING)


def _run_analyze(problem, cfg: RunConfig) -> int:
    ystar = problem.ystar()
    ms = multiplier_set(problem, problem.ybar, ystar)
    payload = {"ystar": [str(v) for v in ystar],
               "active_set": _one_based(ms.active),
               "multiplier_set": ms.polyhedron.to_json_dict(),
               "extreme_points": [[str(x) for x in e] for e in ms.extreme]}
    if ms.is_feasible:
        uniq = multiplier_uniqueness(problem)
        payload["unique"] = uniq.unique
        if uniq.second is not None:
            payload["second_multiplier"] = [str(x) for x in uniq.second]
        payload["min_norm_multiplier"] = [
            str(x) for x in min_norm_multiplier(problem, problem.ybar, ystar)]
        payload["critical_cone"] = critical_cone(
            problem, problem.ybar, ystar).cone.to_json_dict()
    return _emit(payload, cfg, EXIT_OK)


def _run_tangent(problem, cfg: RunConfig, v, vstar) -> int:
    for name, vector in (("--v", v), ("--vstar", vstar)):
        if vector is not None and len(vector) != problem.m:
            raise UsageError(f"{name} expects a vector of length {problem.m}")
    ystar = problem.ystar()
    if vstar is None:
        t = graph_tangent_slice(problem, problem.ybar, ystar, v)
        payload = {"v": [str(x) for x in v], "slice": t.to_json_dict()}
        return _emit(payload, cfg, EXIT_OK)
    res = graph_tangent_member(problem, problem.ybar, ystar, v, vstar)
    payload = {"v": [str(x) for x in v], "vstar": [str(x) for x in vstar],
               "member": res.member}
    if res.member:
        payload["witness"] = {"lambda": [str(x) for x in res.lam],
                              "mu": [str(x) for x in res.mu]}
    else:
        payload["reason"] = res.reason
    return _emit(payload, cfg, EXIT_OK if res.member else EXIT_FINDING)


def _run_certify(problem, cfg: RunConfig) -> int:
    verdict = certify_mscq_mpec(problem, depth=cfg.depth)
    payload = verdict.to_json_dict()
    return _emit(payload, cfg, _status_exit(verdict.status.value))


def _run_diagnose(problem, cfg: RunConfig) -> int:
    pt = mpcc_index_sets(problem, cfg.lam)
    mfcq = mpcc_mfcq_check(problem, cfg.lam)
    licq = mpcc_licq_check(problem, cfg.lam)
    cone = mpec_linearized_cone(problem, cfg.lam)
    payload = {
        "index_sets": {"I_g": _one_based(pt.I_g), "I_lambda": _one_based(pt.I_lam),
                       "I_0": _one_based(pt.I_0), "I_G": _one_based(pt.I_G)},
        "mfcq": {
            "family_independent": mfcq.family_independent,
            "via_second_multiplier": mfcq.via_second_multiplier,
            "branches": [
                {"beta1": _one_based(br.beta1), "beta2": _one_based(br.beta2),
                 "verdict": v.to_json_dict()} for br, v in mfcq.branches],
        },
        "licq": licq.to_json_dict(),
        "linearized_cone": {"pieces": [p.to_json_dict() for p in cone.pieces]},
    }
    if problem.F is not None:
        payload["stationarity"] = {}
        for mode in ("W", "M"):
            res = stationarity_check(problem, cfg.lam, mode)
            entry = {"feasible": res.feasible}
            if res.multipliers:
                entry["multipliers"] = {
                    k: [str(x) for x in vv] for k, vv in res.multipliers.items()}
            payload["stationarity"][mode] = entry
    finding = (any(v.status is Status.FAILS for _, v in mfcq.branches)
               or licq.status is Status.FAILS)
    return _emit(payload, cfg, EXIT_FINDING if finding else EXIT_OK)


def _run_probe(problem, cfg: RunConfig, args) -> int:
    if args.mode == "graph":
        if args.base is None or args.direction is None:
            raise UsageError("graph mode needs --base and --direction")
        if len(args.base) != 2 * problem.m or len(args.direction) != 2 * problem.m:
            raise UsageError(f"graph mode expects vectors of length "
                             f"{2 * problem.m} (y followed by y*)")
        rep = tangent_ratio_probe(problem, args.base, args.direction,
                                  budget=cfg.budget, seed=cfg.seed,
                                  vanish_tol=cfg.vanish_tol,
                                  away_tol=cfg.away_tol)
        payload = rep.to_json_dict()
        code = {"RATIO_VANISHES": EXIT_OK, "RATIO_BOUNDED_AWAY": EXIT_FINDING,
                "INCONCLUSIVE": EXIT_UNKNOWN}[rep.verdict]
        return _emit(payload, cfg, code)
    if args.mode == "mpcc":
        if args.point is None:
            raise UsageError("mpcc mode needs --point")
        if args.lam is not None and args.direction is not None:
            ev = gcq_evidence(problem, args.lam, args.direction,
                              budget=cfg.budget, seed=cfg.seed,
                              away_tol=cfg.away_tol,
                              vanish_tol=cfg.vanish_tol)
            code = {"GACQ_VIOLATION_EVIDENCE": EXIT_FINDING,
                    "TANGENT_CONSISTENT": EXIT_OK,
                    "INCONCLUSIVE": EXIT_UNKNOWN}[ev.tag]
            return _emit(ev.to_json_dict(), cfg, code)
        res = dist_mpcc(problem, args.point, budget=cfg.budget, seed=cfg.seed)
        payload = {"distance_upper_bound": res.value, "fallback": res.fallback}
        return _emit(payload, cfg, EXIT_OK)
    # error-bound mode
    rep = error_bound_probe_mpec(problem, samples=max(4, cfg.budget // 25),
                                 seed=cfg.seed, budget=max(4, cfg.budget // 25))
    code = {"MSCQ_FAILURE_SIGNAL": EXIT_FINDING,
            "CONSISTENT_WITH_MSCQ": EXIT_OK,
            "INCONCLUSIVE": EXIT_UNKNOWN}[rep.tag]
    return _emit(rep.to_json_dict(), cfg, code)


class UsageError(ValueError):
    pass


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    cfg = RunConfig(command=args.command, problem=args.problem,
                    lam=getattr(args, "lam", None), depth=args.depth,
                    budget=args.budget, seed=args.seed, threads=args.threads,
                    vanish_tol=args.vanish_tol, away_tol=args.away_tol,
                    output="json" if args.json else "text")
    try:
        problem = load_problem(args.problem)
    except FileNotFoundError:
        print(f"error: no such problem file: {args.problem}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "validate":
            return _run_validate(problem, cfg)
        if args.command == "analyze":
            return _run_analyze(problem, cfg)
        if args.command == "tangent-cone":
            return _run_tangent(problem, cfg, args.v, args.vstar)
        if args.command == "certify-mscq":
            return _run_certify(problem, cfg)
        if args.command == "diagnose-mpcc":
            return _run_diagnose(problem, cfg)
        if args.command == "probe":
            return _run_probe(problem, cfg, args)
        raise UsageError(f"unknown command {args.command}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasiblePoint, NoMultiplier, DirectionNotCritical,
            DirectionNotInLinCone, MissingObjective, BaseNotOnGraph,
            LpUnbounded, DimensionMismatch, VectorDimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
