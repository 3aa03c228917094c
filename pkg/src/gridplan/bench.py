"""Scenario generators, an exhaustive oracle and the method comparison harness."""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .network import (Demand, Network, NetworkFormatError, Request, make_star, network_from_dict,
                      validate)

log = logging.getLogger(__name__)

CASES = ("distinct", "weighted", "shared")
DEFAULT_WEIGHTS = (1.0, 0.6, 0.01, 0.01)
DEFAULT_SLOWDOWNS = (1, 2, 4, 8)
METHODS = ("optimal", "optimal+symmetry", "time-limited", "chunked", "p2p")


@dataclass(frozen=True)
class ScenarioSpec:
    case: str
    n_files: int
    seed: int = 0
    weights: tuple[float, ...] = DEFAULT_WEIGHTS
    network: Network = field(default_factory=lambda: make_star(DEFAULT_SLOWDOWNS))
    destination: str = "dest"

    @property
    def sources(self) -> list[str]:
        return [s for s in self.network.site_ids if s != self.destination]

    def check(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}, expected one of {CASES}")
        if self.n_files < 1:
            raise ValueError("n_files must be positive")
        if self.case == "weighted":
            if len(self.weights) != len(self.sources):
                raise ValueError(f"{len(self.weights)} weights for {len(self.sources)} source sites")
            if max(self.weights) != 1.0 or min(self.weights) < 0:
                raise ValueError("weights must lie in [0, 1] with maximum 1.0")


def generate(spec: ScenarioSpec) -> Request:
    """Unit-size files whose origin sets follow the distinct/weighted/shared case."""
    spec.check()
    rng = np.random.default_rng(spec.seed)
    sources = spec.sources
    demands = []
    for i in range(spec.n_files):
        if spec.case == "distinct":
            origins = {sources[int(rng.integers(len(sources)))]}
        elif spec.case == "shared":
            origins = set(sources)
        else:
            draws = rng.random(len(sources))
            origins = {s for s, w, u in zip(sources, spec.weights, draws) if w >= 1.0 or u < w}
        demands.append(Demand(f"f{i:03d}", frozenset(origins), 1))
    return Request(spec.destination, tuple(demands))


# --- exhaustive oracle ------------------------------------------------------

class OracleLimitExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_sources: int = 4
    max_demands: int = 4
    max_links: int = 6
    max_hops: int = 2


def _paths(network: Network, demand: Demand, dest: str, transit: bool, max_hops: int) -> list[tuple]:
    """All simple paths (as link tuples) leaving one origin and ending at ``dest``
    without entering any origin."""
    out = []

    def extend(node, path, seen):
        for l in network.links:
            if l.src != node or l.dst in seen or l.dst in demand.origins:
                continue
            p = path + (l,)
            if l.dst == dest:
                out.append(p)
            elif transit and len(p) < max_hops:
                extend(l.dst, p, seen | {l.dst})

    for o in sorted(demand.origins):
        extend(o, (), {o})
    return out


def brute_force_optimal(network: Network, request: Request, limits: Optional[OracleLimits] = None, *,
                        transit: bool = False, shared_groups: bool = False, storage: bool = False,
                        consumption=None) -> Optional[int]:
    """Exact minimum makespan by enumeration, or None when infeasible.

    Every combination of paths is tried.  Without storage limits each
    combination is scheduled by the serial generation scheme over every
    distinct activity list; with storage limits every integer start-time
    vector up to the serial horizon is enumerated.
    """
    limits = limits or OracleLimits()
    res = validate(network, request)
    if not res.ok:
        raise ValueError("; ".join(res.violations))
    request = res.request
    n_sources = len({o for d in request.demands for o in d.origins})
    if (n_sources > limits.max_sources or len(request.demands) > limits.max_demands
            or len(network.links) > limits.max_links):
        raise OracleLimitExceeded(
            f"{n_sources} sources / {len(request.demands)} demands / {len(network.links)} links exceed {limits}")
    if not request.demands:
        return 0
    dest = request.destination
    cons = consumption or (lambda l: l.slowdown)
    groups = []
    if shared_groups:
        for g in network.shared_groups:
            groups.append((set(g.members), g.capacity))
    caps = {}
    if storage:
        caps = {s.id: s.storage for s in network.sites if s.storage is not None}

    choices = [_paths(network, d, dest, transit, limits.max_hops) for d in request.demands]
    if any(not c for c in choices):
        return None
    best = None
    for combo in itertools.product(*choices):
        load: dict[str, int] = {}
        lb = 0
        for d, path in zip(request.demands, combo):
            total = 0
            for l in path:
                load[l.id] = load.get(l.id, 0) + d.size * l.slowdown
                total += d.size * l.slowdown
            lb = max(lb, total)
        lb = max([lb, *load.values()])
        if best is not None and lb >= best:
            continue
        uses_storage = any(l.dst in caps for path in combo for l in path[:-1])
        if uses_storage:
            ms = _enumerate_starts(request.demands, combo, groups, caps, cons, best)
        else:
            ms = _serial_sgs(request.demands, combo, groups, cons, best)
        if ms is not None and (best is None or ms < best):
            best = ms
    return best


def _fits(occ, link, groups, cons, s, e) -> bool:
    for (a, b) in occ["links"].get(link.id, ()):
        if a < e and s < b:
            return False
    for gi, (members, cap) in enumerate(groups):
        if link.id not in members:
            continue
        c = cons(link)
        if c > cap:
            return False
        ivs = occ["groups"].get(gi, [])
        for p in {s} | {a for a, _, _ in ivs if s <= a < e}:
            used = sum(w for a, b, w in ivs if a <= p < b)
            if used + c > cap:
                return False
    return True


def _place(occ, link, groups, cons, s, e):
    occ["links"].setdefault(link.id, []).append((s, e))
    for gi, (members, _) in enumerate(groups):
        if link.id in members:
            occ["groups"].setdefault(gi, []).append((s, e, cons(link)))


def _unplace(occ, link, groups):
    occ["links"][link.id].pop()
    for gi, (members, _) in enumerate(groups):
        if link.id in members:
            occ["groups"][gi].pop()


def _serial_sgs(demands, combo, groups, cons, best) -> Optional[int]:
    """Best makespan below ``best`` over all activity lists, or None."""
    for path in combo:
        for link in path:
            if any(link.id in members and cons(link) > cap for members, cap in groups):
                return None
    # demands with identical path and size are interchangeable
    sig = [(tuple(l.id for l in path), d.size) for d, path in zip(demands, combo)]
    n = len(demands)
    total = sum(len(p) for p in combo)
    hop = [0] * n
    ready = [0] * n
    occ = {"links": {}, "groups": {}}
    bound = [best]
    found = [False]

    def rec(done, makespan):
        if bound[0] is not None and makespan >= bound[0]:
            return
        if done == total:
            bound[0] = makespan
            found[0] = True
            return
        tried = set()
        for i in range(n):
            if hop[i] >= len(combo[i]) or (sig[i], hop[i]) in tried:
                continue
            tried.add((sig[i], hop[i]))
            link = combo[i][hop[i]]
            dur = demands[i].size * link.slowdown
            # earliest feasible start is the ready time or the end of some placed interval
            cands = sorted({ready[i]}
                           | {b for ivs in occ["links"].values() for _, b in ivs if b > ready[i]}
                           | {b for ivs in occ["groups"].values() for _, b, _ in ivs if b > ready[i]})
            s = next(c for c in cands if _fits(occ, link, groups, cons, c, c + dur))
            _place(occ, link, groups, cons, s, s + dur)
            old = ready[i]
            hop[i] += 1
            ready[i] = s + dur
            rec(done + 1, max(makespan, s + dur))
            hop[i] -= 1
            ready[i] = old
            _unplace(occ, link, groups)

    rec(0, 0)
    return bound[0] if found[0] else None


def _enumerate_starts(demands, combo, groups, caps, cons, best) -> Optional[int]:
    tasks = []  # (demand idx, hop, link, duration)
    for i, (d, path) in enumerate(zip(demands, combo)):
        for h, l in enumerate(path):
            tasks.append((i, h, l, d.size * l.slowdown))
    horizon = sum(t[3] for t in tasks)
    starts: dict[tuple[int, int], int] = {}
    occ = {"links": {}, "groups": {}}
    held: dict[str, list[tuple[int, int, int]]] = {}
    result = [best if best is not None else horizon + 1]
    found = [False]

    def rec(k, makespan):
        if makespan >= result[0]:
            return
        if k == len(tasks):
            result[0] = makespan
            found[0] = True
            return
        i, h, link, dur = tasks[k]
        earliest = starts[(i, h - 1)] + combo[i][h - 1].slowdown * demands[i].size if h else 0
        for s in range(earliest, result[0] - dur):
            e = s + dur
            if not _fits(occ, link, groups, cons, s, e):
                continue
            site_iv = None
            if h:
                site = link.src
                if site in caps:
                    site_iv = (site, starts[(i, h - 1)], e, demands[i].size)
                    ivs = held.get(site, [])
                    a0, b0 = site_iv[1], site_iv[2]
                    pts = {a0} | {a for a, _, _ in ivs if a0 <= a < b0}
                    if any(sum(w for a, b, w in ivs if a <= p < b) + site_iv[3] > caps[site] for p in pts):
                        continue
            _place(occ, link, groups, cons, s, e)
            starts[(i, h)] = s
            if site_iv:
                held.setdefault(site_iv[0], []).append(site_iv[1:])
            rec(k + 1, max(makespan, e))
            if site_iv:
                held[site_iv[0]].pop()
            del starts[(i, h)]
            _unplace(occ, link, groups)

    rec(0, 0)
    return result[0] if found[0] else None


# --- comparison harness -----------------------------------------------------

@dataclass
class ComparisonRow:
    method: str
    case: str
    n_files: int
    reps: int
    wall_time: float  # median seconds
    makespan: Optional[float]  # median over reps with a schedule
    loss_pct: Optional[float]
    timeouts: int = 0

    def csv_row(self) -> list:
        return [self.method, self.case, self.n_files, self.reps, f"{self.wall_time * 1000.0:.3f}",
                "" if self.makespan is None else f"{self.makespan:g}",
                "" if self.loss_pct is None else f"{self.loss_pct:.3f}"]


CSV_HEADER = ["method", "case", "n_files", "seed_reps", "median_wall_ms", "median_makespan", "loss_pct"]


@dataclass
class RunResult:
    makespan: Optional[int]
    wall_time: float
    proven_optimal: bool
    timed_out: bool
    nodes: int = 0


def run_method(method: str, network: Network, request: Request, *, seed: int = 0,
               budget_ms: Optional[float] = None, chunk_size: int = 1, time_coeff_ms: float = 100.0,
               config=None) -> RunResult:
    from .p2p import simulate
    from .solver import Budget, ModelConfig, build_model, solve
    from .strategies import solve_chunked, solve_time_limited

    config = config or ModelConfig()
    t0 = time.perf_counter()
    if method in ("optimal", "optimal+symmetry"):
        cfg = config if method == "optimal" else _with(config, symmetry_breaking=True)
        sched, rep = solve(build_model(network, request, cfg), Budget(time_ms=budget_ms))
        return RunResult(rep.best_makespan, rep.wall_time, rep.proven_optimal, rep.status in ("feasible", "budget"),
                         rep.nodes)
    if method == "time-limited":
        sched, rep = solve_time_limited(network, request, time_coeff_ms, config)
        return RunResult(rep.best_makespan, rep.wall_time, rep.proven_optimal, not rep.proven_optimal, rep.nodes)
    if method == "chunked" or method.startswith("chunked("):
        k = int(method[8:-1]) if method.startswith("chunked(") else chunk_size
        sched, reps = solve_chunked(network, request, k, config, budget=Budget(time_ms=budget_ms))
        return RunResult(sched.makespan, time.perf_counter() - t0, False,
                         any(not r.proven_optimal for r in reps), sum(r.nodes for r in reps))
    if method == "p2p":
        sched, _ = simulate(network, request, seed)
        return RunResult(sched.makespan, time.perf_counter() - t0, False, False)
    raise ValueError(f"unknown method {method!r}")


def _with(config, **changes):
    from dataclasses import replace
    return replace(config, **changes)


def run_comparison(spec: ScenarioSpec, methods: Sequence[str], repetitions: int = 3,
                   n_files: Optional[Sequence[int]] = None, budget_ms: float = 10_000.0,
                   time_coeff_ms: float = 100.0) -> list[ComparisonRow]:
    """Median wall time, makespan and loss against the optimum per (method, n)."""
    from dataclasses import replace
    sizes = list(n_files) if n_files is not None else [spec.n_files]
    rows = []
    for n in sizes:
        results: dict[str, list[RunResult]] = {m: [] for m in methods}
        for rep in range(repetitions):
            sub = replace(spec, n_files=n, seed=spec.seed + rep)
            req = generate(sub)
            for m in methods:
                results[m].append(run_method(m, spec.network, req, seed=sub.seed, budget_ms=budget_ms,
                                             time_coeff_ms=time_coeff_ms))
        reference = []
        for rep in range(repetitions):
            opt = [results[m][rep] for m in ("optimal", "optimal+symmetry") if m in results]
            proven = [r.makespan for r in opt if r.proven_optimal]
            if proven:
                reference.append(proven[0])
            else:
                try:
                    req = generate(replace(spec, n_files=n, seed=spec.seed + rep))
                    reference.append(brute_force_optimal(spec.network, req))
                except OracleLimitExceeded:
                    reference.append(None)
        for m in methods:
            rs = results[m]
            spans = [r.makespan for r in rs if r.makespan is not None]
            losses = [100.0 * (r.makespan - ref) / ref for r, ref in zip(rs, reference)
                      if r.makespan is not None and ref]
            loss = float(np.median(losses)) if len(losses) == len(rs) else None
            timeouts = sum(r.timed_out for r in rs)
            if timeouts:
                log.warning("%s n=%d: %d/%d runs hit the budget", m, n, timeouts, len(rs))
            rows.append(ComparisonRow(m, spec.case, n, repetitions, float(np.median([r.wall_time for r in rs])),
                                      float(np.median(spans)) if spans else None, loss, timeouts))
    return rows


def rows_to_csv(rows: Sequence[ComparisonRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def load_scenario(path: Union[str, Path]) -> tuple[ScenarioSpec, dict]:
    """Read a scenario file; returns the spec and the harness options
    (``n_files`` list, ``methods``, ``reps``, ``budget_ms``)."""
    try:
        data = json.loads(Path(path).read_bytes())
    except ValueError as exc:
        raise NetworkFormatError(f"scenario: not valid JSON ({exc})") from None
    allowed = {"case", "n_files", "weights", "seed", "network", "destination", "slowdowns",
               "methods", "reps", "budget_ms"}
    if not isinstance(data, dict):
        raise NetworkFormatError("scenario: expected an object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise NetworkFormatError(f"scenario: unknown keys {unknown}")
    if "case" not in data:
        raise NetworkFormatError("scenario: missing key 'case'")
    dest = data.get("destination", "dest")
    if "network" in data:
        network = network_from_dict(data["network"])
        res = validate(network)
        if not res.ok:
            raise NetworkFormatError("; ".join(res.violations))
    else:
        network = make_star(data.get("slowdowns", DEFAULT_SLOWDOWNS), dest)
    sizes = data.get("n_files", [4])
    if isinstance(sizes, int):
        sizes = [sizes]
    spec = ScenarioSpec(data["case"], max(sizes), int(data.get("seed", 0)),
                        tuple(data.get("weights", DEFAULT_WEIGHTS)), network, dest)
    try:
        spec.check()
    except ValueError as exc:
        raise NetworkFormatError(f"scenario: {exc}") from None
    opts = {"n_files": sorted(sizes), "methods": data.get("methods"), "reps": data.get("reps"),
            "budget_ms": data.get("budget_ms")}
    return spec, opts
