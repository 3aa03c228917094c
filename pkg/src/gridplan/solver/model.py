"""Constraint model for routing demands over links and timing the transfers.

One boolean routing variable exists per (demand, candidate link) and one
start-time variable per routing variable.  Flow conservation fixes a single
path per demand, links are unary resources, shared-link groups and bounded
storage sites are cumulative resources.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..network import Demand, Link, Network, Request, transfer_duration, validate


class InfeasibleModel(ValueError):
    """Raised when an instance has no solution regardless of timing."""


@dataclass(frozen=True)
class ModelConfig:
    allow_transit: bool = False
    enforce_shared_groups: bool = False
    enforce_storage: bool = False
    symmetry_breaking: bool = False
    horizon_override: Optional[int] = None
    # "timetable" propagates compulsory parts only; "energetic" adds overload checking
    propagation: str = "energetic"
    # consumption of a transfer on a shared group member; defaults to the slowdown factor
    consumption: Optional[Callable[[Link], int]] = None

    def consumption_of(self, link: Link) -> int:
        return self.consumption(link) if self.consumption else link.slowdown


@dataclass(frozen=True)
class FakeTask:
    """Fixed occupation of a link carried over from an earlier schedule."""

    link: str
    start: int
    end: int
    demand: Optional[str] = None
    size: int = 1


@dataclass(frozen=True)
class RoutingVar:
    demand: str
    link: str
    index: int
    domain: frozenset


@dataclass(frozen=True)
class StartVar:
    demand: str
    link: str
    index: int
    lo: int
    hi: int


@dataclass(frozen=True)
class ChannelingVar:
    demand: str
    site: str
    in_link: str
    out_link: str
    in_task: int
    out_task: int
    domain: frozenset


@dataclass
class Resource:
    """Cumulative resource: ``tasks`` are (task index, consumption) pairs."""

    name: str
    capacity: int
    tasks: list[tuple[int, int]]
    fakes: list[tuple[int, int, int]]  # (start, end, consumption)
    kind: str = "link"


@dataclass
class StorageResource:
    site: str
    capacity: int
    pairs: list[tuple[int, int, int]]  # (in task, out task, size)
    fakes: list[tuple[int, int, int]]


@dataclass
class Model:
    network: Network
    request: Request
    config: ModelConfig
    t_demand: list[int] = field(default_factory=list)
    t_link: list[int] = field(default_factory=list)
    t_dur: list[int] = field(default_factory=list)
    exactly_one: list[list[int]] = field(default_factory=list)
    flow: list[tuple[list[int], list[int]]] = field(default_factory=list)
    chains: list[tuple[int, int]] = field(default_factory=list)
    resources: list[Resource] = field(default_factory=list)
    storage: list[StorageResource] = field(default_factory=list)
    symmetry: list[tuple[list[tuple[int, int]], list[tuple[int, int]]]] = field(default_factory=list)
    # interchangeable demands, each member as aligned (link index, task) pairs
    symmetry_classes: list[list[list[tuple[int, int]]]] = field(default_factory=list)
    channeling: list[ChannelingVar] = field(default_factory=list)
    link_res: dict[int, Resource] = field(default_factory=dict)
    fakes: tuple[FakeTask, ...] = ()
    horizon: int = 0
    fake_end: int = 0
    x0: list[int] = field(default_factory=list)

    @property
    def n_tasks(self) -> int:
        return len(self.t_dur)

    @property
    def routing_vars(self) -> list[RoutingVar]:
        dom = {-1: frozenset({0, 1}), 0: frozenset({0}), 1: frozenset({1})}
        return [RoutingVar(self.request.demands[self.t_demand[t]].name, self.network.links[self.t_link[t]].id,
                           t, dom[self.x0[t]]) for t in range(self.n_tasks)]

    @property
    def start_vars(self) -> list[StartVar]:
        return [StartVar(self.request.demands[self.t_demand[t]].name, self.network.links[self.t_link[t]].id,
                         t, 0, self.horizon - self.t_dur[t]) for t in range(self.n_tasks)]

    def tasks_of(self, demand: str) -> list[int]:
        i = [d.name for d in self.request.demands].index(demand)
        return [t for t in range(self.n_tasks) if self.t_demand[t] == i]


def _candidate_links(network: Network, demand: Demand, dest: str, transit: bool) -> list[int]:
    """Indices of links that can lie on an admissible path for ``demand``.

    A path leaves exactly one origin, never enters an origin and never leaves
    the destination.
    """
    links = network.links
    if not transit:
        return [i for i, l in enumerate(links) if l.src in demand.origins and l.dst == dest]
    usable = [i for i, l in enumerate(links) if l.dst not in demand.origins and l.src != dest]
    fwd = set(demand.origins)
    changed = True
    while changed:
        changed = False
        for i in usable:
            l = links[i]
            if l.src in fwd and l.dst not in fwd:
                fwd.add(l.dst)
                changed = True
    bwd = {dest}
    changed = True
    while changed:
        changed = False
        for i in usable:
            l = links[i]
            if l.dst in bwd and l.src not in bwd:
                bwd.add(l.src)
                changed = True
    return [i for i in usable if links[i].src in fwd and links[i].dst in bwd]


def _usable_link(network: Network, config: ModelConfig, link: Link) -> bool:
    if not config.enforce_shared_groups:
        return True
    return all(config.consumption_of(link) <= g.capacity
               for g in network.shared_groups if link.id in g.members)


def _greedy_path_duration(network: Network, config: ModelConfig, demand: Demand, dest: str,
                          cands: Sequence[int]) -> Optional[int]:
    """Duration of the fastest admissible path of one demand, or None."""
    links = network.links
    dist = {o: 0 for o in demand.origins}
    heap = [(0, o) for o in sorted(demand.origins)]
    out: dict[str, list[Link]] = {}
    for i in cands:
        l = links[i]
        if not _usable_link(network, config, l):
            continue
        if config.enforce_storage and l.dst != dest:
            cap = network.site(l.dst).storage
            if cap is not None and cap < demand.size:
                continue
        out.setdefault(l.src, []).append(l)
    while heap:
        d, n = heapq.heappop(heap)
        if n == dest:
            return d
        if d > dist.get(n, d):
            continue
        for l in out.get(n, ()):
            nd = d + transfer_duration(demand, l)
            if nd < dist.get(l.dst, nd + 1):
                dist[l.dst] = nd
                heapq.heappush(heap, (nd, l.dst))
    return None


def build_model(network: Network, request: Request, config: ModelConfig = ModelConfig(),
                fakes: Sequence[FakeTask] = ()) -> Model:
    """Build the routing/timing model; ``fakes`` pre-occupy resources."""
    res = validate(network, request)
    if len(res.violations) > len(res.unreachable):
        raise ValueError("; ".join(res.violations))
    if res.unreachable:
        raise InfeasibleModel("; ".join(res.violations))
    request = res.request
    dest = request.destination
    m = Model(network, request, config, fakes=tuple(fakes))
    link_pos = {l.id: i for i, l in enumerate(network.links)}
    m.fake_end = max((f.end for f in fakes), default=0)

    total = m.fake_end
    per_demand: list[list[int]] = []
    for di, d in enumerate(request.demands):
        cands = _candidate_links(network, d, dest, config.allow_transit)
        best = _greedy_path_duration(network, config, d, dest, cands)
        if best is None:
            raise InfeasibleModel(f"demand {d.name!r} has no admissible path to {dest!r}")
        total += best
        ts = []
        for li in cands:
            t = len(m.t_dur)
            m.t_demand.append(di)
            m.t_link.append(li)
            m.t_dur.append(transfer_duration(d, network.links[li]))
            ts.append(t)
        per_demand.append(ts)
    m.horizon = config.horizon_override if config.horizon_override is not None else total
    m.x0 = [-1] * len(m.t_dur)

    # flow conservation
    for di, d in enumerate(request.demands):
        ts = per_demand[di]
        src = lambda t: network.links[m.t_link[t]].src
        dst = lambda t: network.links[m.t_link[t]].dst
        m.exactly_one.append([t for t in ts if src(t) in d.origins])
        m.exactly_one.append([t for t in ts if dst(t) == dest])
        nodes = sorted({dst(t) for t in ts} | {src(t) for t in ts}, key=network.site_ids.index)
        for n in nodes:
            if n in d.origins or n == dest:
                continue
            ins = [t for t in ts if dst(t) == n]
            outs = [t for t in ts if src(t) == n]
            m.flow.append((ins, outs))
            for ti in ins:
                for to in outs:
                    m.chains.append((ti, to))
                    m.channeling.append(ChannelingVar(d.name, n, network.links[m.t_link[ti]].id,
                                                      network.links[m.t_link[to]].id, ti, to,
                                                      frozenset({0, 1})))

    # unary links
    by_link: dict[int, list[int]] = {}
    for t, li in enumerate(m.t_link):
        by_link.setdefault(li, []).append(t)
    fakes_by_link: dict[int, list[FakeTask]] = {}
    for f in fakes:
        fakes_by_link.setdefault(link_pos[f.link], []).append(f)
    for li, l in enumerate(network.links):
        ts = by_link.get(li, [])
        if ts:
            m.link_res[li] = Resource(l.id, 1, [(t, 1) for t in ts],
                                      [(f.start, f.end, 1) for f in fakes_by_link.get(li, [])])
            m.resources.append(m.link_res[li])

    if config.enforce_shared_groups:
        for gi, g in enumerate(network.shared_groups):
            members = [link_pos[x] for x in dict.fromkeys(g.members)]
            tasks = [(t, config.consumption_of(network.links[li])) for li in members for t in by_link.get(li, [])]
            gf = [(f.start, f.end, config.consumption_of(network.links[li]))
                  for li in members for f in fakes_by_link.get(li, [])]
            if tasks:
                m.resources.append(Resource(f"group{gi}", g.capacity, tasks, gf, kind="group"))

    if config.enforce_storage:
        occupied = _fake_storage(network, fakes)
        for s in network.sites:
            if s.storage is None:
                continue
            pairs = [(c.in_task, c.out_task, request.demands[m.t_demand[c.in_task]].size)
                     for c in m.channeling if c.site == s.id]
            sf = occupied.get(s.id, [])
            if pairs or sf:
                m.storage.append(StorageResource(s.id, s.storage, pairs, sf))

    if config.symmetry_breaking:
        m.symmetry, m.symmetry_classes = symmetry_pairs(m)
    return m


def symmetry_pairs(m: Model) -> tuple[list, list]:
    """Consecutive pairs and whole classes of interchangeable demands (same
    origins and size) in direct-connection mode."""
    if m.config.allow_transit:
        return [], []
    per_demand: dict[int, list[int]] = {}
    for t, di in enumerate(m.t_demand):
        per_demand.setdefault(di, []).append(t)
    groups: dict[tuple, list[int]] = {}
    for di, d in enumerate(m.request.demands):
        groups.setdefault((d.origins, d.size), []).append(di)
    pairs, classes = [], []
    for members in groups.values():
        if len(members) < 2:
            continue
        cls = [[(m.t_link[t], t) for t in per_demand.get(p, [])] for p in members]
        classes.append(cls)
        pairs.extend(zip(cls, cls[1:]))
    return pairs, classes


def _fake_storage(network: Network, fakes: Sequence[FakeTask]) -> dict[str, list[tuple[int, int, int]]]:
    """Storage held at transit sites by consecutive fake transfers of one demand."""
    out: dict[str, list[tuple[int, int, int]]] = {}
    by_demand: dict[str, list[FakeTask]] = {}
    for f in fakes:
        if f.demand is not None:
            by_demand.setdefault(f.demand, []).append(f)
    for fs in by_demand.values():
        fs = sorted(fs, key=lambda f: f.start)
        for a, b in zip(fs, fs[1:]):
            site = network.link(a.link).dst
            if network.link(b.link).src == site:
                out.setdefault(site, []).append((a.start, b.end, a.size))
    return out
