"""Independent checker for finished schedules.

Everything here works on concrete intervals; nothing is shared with the
solver's propagators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .network import Network, Request, Schedule, ScheduleEntry


@dataclass(frozen=True)
class Violation:
    kind: str
    resource: str
    time: Optional[int]
    message: str

    def __str__(self) -> str:
        at = "" if self.time is None else f" at t={self.time}"
        return f"{self.kind} violation on {self.resource}{at}: {self.message}"


def _peak(intervals: list[tuple[int, int, int]]) -> tuple[int, int]:
    """Maximum summed weight of half-open intervals and the first time it occurs."""
    events = []
    for s, e, w in intervals:
        events.append((s, 1, w))
        events.append((e, 0, -w))  # ends sort before starts at equal times
    events.sort()
    load = best = 0
    when = 0
    for t, _, w in events:
        load += w
        if load > best:
            best, when = load, t
    return best, when


def storage_intervals(schedule: Schedule, network: Network,
                      request: Optional[Request] = None) -> dict[str, list[tuple[int, int, int, str]]]:
    """Per transit site: (start of arrival, end of departure, size, demand)."""
    links = {l.id: l for l in network.links}
    out: dict[str, list[tuple[int, int, int, str]]] = {}
    for name, path in schedule.paths().items():
        for a, b in zip(path, path[1:]):
            site = links[a.link].dst
            size = request.demand(name).size if request else (a.end - a.start) // links[a.link].slowdown
            out.setdefault(site, []).append((a.start, b.end, size, name))
    return out


def replay(schedule: Schedule, network: Network, request: Optional[Request] = None, *,
           check_shared_groups: bool = True, check_storage: bool = True,
           consumption=None) -> Optional[Violation]:
    """Return the first violated constraint of ``schedule``, or None.

    Without ``request`` origins, destination and sizes cannot be checked;
    sizes are then inferred from durations.
    """
    links = {l.id: l for l in network.links}
    for e in schedule.entries:
        if e.link not in links:
            return Violation("link", e.link, e.start, "unknown link")
        if e.start < 0:
            return Violation("time", e.link, e.start, f"{e.demand} starts before 0")
        l = links[e.link]
        if request is not None:
            try:
                d = request.demand(e.demand)
            except KeyError:
                return Violation("demand", e.demand, e.start, "not in the request")
            if e.end - e.start != d.size * l.slowdown:
                return Violation("duration", e.link, e.start,
                                 f"{e.demand} takes {e.end - e.start}, expected {d.size * l.slowdown}")
        elif e.end <= e.start or (e.end - e.start) % l.slowdown:
            return Violation("duration", e.link, e.start, f"{e.demand} has duration {e.end - e.start}")

    paths = schedule.paths()
    if request is not None:
        for d in request.demands:
            if d.name not in paths:
                return Violation("path", d.name, None, "demand never transferred")
    for name, path in paths.items():
        v = _check_path(name, path, links, request)
        if v:
            return v

    by_link: dict[str, list[ScheduleEntry]] = {}
    for e in schedule.entries:
        by_link.setdefault(e.link, []).append(e)
    for lid, es in by_link.items():
        es = sorted(es, key=lambda e: e.start)
        for a, b in zip(es, es[1:]):
            if b.start < a.end:
                return Violation("link", lid, b.start, f"{a.demand} and {b.demand} overlap")

    if check_shared_groups:
        cons = consumption or (lambda l: l.slowdown)
        for i, g in enumerate(network.shared_groups):
            ivs = [(e.start, e.end, cons(links[e.link])) for e in schedule.entries if e.link in g.members]
            peak, when = _peak(ivs)
            if peak > g.capacity:
                return Violation("shared group", f"group{i}", when, f"load {peak} > capacity {g.capacity}")

    if check_storage:
        caps = {s.id: s.storage for s in network.sites if s.storage is not None}
        for site, ivs in storage_intervals(schedule, network, request).items():
            if site not in caps:
                continue
            peak, when = _peak([(s, e, w) for s, e, w, _ in ivs])
            if peak > caps[site]:
                return Violation("storage", site, when, f"storage at {site}: {peak} > capacity {caps[site]}")
    return None


def _check_path(name, path, links, request) -> Optional[Violation]:
    for a, b in zip(path, path[1:]):
        if links[a.link].dst != links[b.link].src:
            return Violation("path", name, b.start, f"{a.link} does not continue into {b.link}")
        if b.start < a.end:
            return Violation("chaining", name, b.start,
                             f"leaves {links[b.link].src} at {b.start} before arriving at {a.end}")
    visited = [links[path[0].link].src] + [links[e.link].dst for e in path]
    if len(set(visited)) != len(visited):
        return Violation("path", name, None, f"revisits a site: {' -> '.join(visited)}")
    if request is not None:
        d = request.demand(name)
        if visited[0] not in d.origins:
            return Violation("path", name, path[0].start, f"starts at {visited[0]}, not an origin")
        if visited[-1] != request.destination:
            return Violation("path", name, path[-1].end, f"ends at {visited[-1]}, not the destination")
        if any(s in d.origins for s in visited[1:]):
            return Violation("path", name, None, "enters an origin site")
    return None
