"""``gridplan`` command line: plan, simulate, bench, gantt, validate.

Exit codes: 0 success, 1 bad input, 2 infeasible, 3 budget exhausted before
any schedule was found.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .network import (NetworkFormatError, Request, load_network, load_request, request_from_dict,
                      schedule_from_csv, schedule_to_csv, validate)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3


def _emit(text: str, path: Optional[str], stream=None):
    if path:
        Path(path).write_text(text)
    else:
        (stream or sys.stdout).write(text)


def _load_pair(args):
    network = load_network(args.network)
    request = load_request(args.request, network)
    return network, request


def _config(args):
    from .solver import ModelConfig
    return ModelConfig(allow_transit=args.transit, enforce_shared_groups=args.shared_groups,
                       enforce_storage=args.storage, symmetry_breaking=args.symmetry)


def cmd_plan(args) -> int:
    from .solver import Budget, InfeasibleModel, build_model, solve
    from .strategies import ChunkInfeasible, solve_chunked, solve_time_limited

    if args.method == "p2p":
        if args.transit:
            print("error: P2P requires direct connections (drop --transit)", file=sys.stderr)
            return EXIT_INPUT
        return cmd_simulate(args)
    network, request = _load_pair(args)
    config = _config(args)
    budget = Budget(time_ms=args.time_limit_ms)
    try:
        if args.method == "optimal":
            sched, rep = solve(build_model(network, request, config), budget)
            report = rep.to_dict()
            status = rep.status
        elif args.method == "timelimited":
            sched, rep = solve_time_limited(network, request, args.time_coeff, config)
            report = rep.to_dict()
            status = rep.status
        else:
            try:
                sched, reps = solve_chunked(network, request, args.chunk_size, config, budget)
                status = "feasible"
            except ChunkInfeasible as exc:
                sched, reps = None, [exc.report]
                status = exc.report.status
                print(f"error: {exc}", file=sys.stderr)
            report = [r.to_dict() for r in reps]
    except InfeasibleModel as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(json.dumps(report, indent=2) + "\n", args.report, sys.stderr)
    if sched is None:
        return EXIT_INFEASIBLE if status == "infeasible" else EXIT_BUDGET
    _emit(schedule_to_csv(sched, network, request), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .p2p import format_trace, simulate

    network, request = _load_pair(args)
    try:
        sched, trace = simulate(network, request, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(format_trace(trace), args.trace, sys.stderr)
    _emit(schedule_to_csv(sched, network, request), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    from dataclasses import replace

    from .bench import load_scenario, rows_to_csv, run_comparison

    spec, opts = load_scenario(args.spec)
    methods = args.methods.split(",") if args.methods else (opts["methods"] or ["optimal", "chunked(1)", "p2p"])
    methods = ["time-limited" if m == "timelimited" else m for m in methods]
    sizes = opts["n_files"]
    if args.max_files is not None:
        sizes = [n for n in sizes if n <= args.max_files] or [args.max_files]
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    reps = args.reps or opts["reps"] or 3
    budget = args.budget_ms or opts["budget_ms"] or 10_000.0
    rows = run_comparison(spec, methods, reps, sizes, budget_ms=budget)
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


def cmd_gantt(args) -> int:
    from .gantt import build_gantt, to_ascii, to_svg
    from .replay import replay

    network = load_network(args.network)
    request = load_request(args.request, network) if args.request else None
    sched = schedule_from_csv(Path(args.schedule).read_text())
    bad = replay(sched, network, request, check_shared_groups=args.shared_groups, check_storage=args.storage)
    if bad:
        print(f"error: schedule rejected: {bad}", file=sys.stderr)
        return EXIT_INPUT
    doc = build_gantt(sched, network, request, storage_lanes=args.storage_lanes, group_lanes=args.shared_groups)
    _emit(to_ascii(doc) if args.ascii else to_svg(doc), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    network_text = Path(args.network).read_bytes()
    from .network import parse_network
    network = parse_network(network_text)
    request: Optional[Request] = None
    if args.request:
        raw = json.loads(Path(args.request).read_bytes())
        request = request_from_dict(raw)
    res = validate(network, request)
    for v in res.violations:
        print(f"violation: {v}")
    for w in res.warnings:
        print(f"warning: {w}")
    for n in res.notices:
        print(f"notice: {n}")
    if res.ok:
        print("ok")
    return EXIT_OK if res.ok else EXIT_INPUT


def _solver_flags(p):
    p.add_argument("--transit", action="store_true", help="allow paths longer than one link")
    p.add_argument("--storage", action="store_true", help="enforce site storage capacities")
    p.add_argument("--shared-groups", action="store_true", help="enforce shared link groups")
    p.add_argument("--symmetry", action="store_true", help="break symmetries between identical files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute a transfer schedule")
    p.add_argument("network")
    p.add_argument("request")
    p.add_argument("--method", choices=["optimal", "chunked", "timelimited", "p2p"], default="optimal")
    p.add_argument("--chunk-size", type=int, default=1)
    p.add_argument("--time-coeff", type=float, default=100.0, help="milliseconds per file (timelimited)")
    p.add_argument("--time-limit-ms", type=float, default=None, help="overall budget for optimal/chunked")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="schedule CSV (default: stdout)")
    p.add_argument("--report", help="search report JSON (default: stderr)")
    p.add_argument("--trace", help="P2P trace (default: stderr)")
    _solver_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run the P2P baseline")
    p.add_argument("network")
    p.add_argument("request")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="schedule CSV (default: stdout)")
    p.add_argument("--trace", help="event trace (default: stderr)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="compare methods on generated scenarios")
    p.add_argument("spec")
    p.add_argument("--out", help="CSV output (default: stdout)")
    p.add_argument("--methods", help="comma separated, e.g. optimal,optimal+symmetry,chunked(1),time-limited,p2p")
    p.add_argument("--max-files", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget-ms", type=float)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gantt", help="render a schedule")
    p.add_argument("schedule")
    p.add_argument("network")
    p.add_argument("--request")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--storage-lanes", action="store_true")
    p.add_argument("--storage", action="store_true", help="check storage capacities before drawing")
    p.add_argument("--shared-groups", action="store_true", help="check and draw shared groups")
    p.add_argument("--ascii", action="store_true")
    p.set_defaults(func=cmd_gantt)

    p = sub.add_parser("validate", help="check network and request files")
    p.add_argument("network")
    p.add_argument("request", nargs="?")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NetworkFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
