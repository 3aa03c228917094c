"""Sites, links, demands and schedules, plus validation and JSON/CSV I/O.

Time is integral throughout: a transfer of a file of ``size`` units over a
link with slowdown factor ``k`` occupies the link for exactly ``size * k``
time units.
"""
from __future__ import annotations

import csv
import io
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

UNBOUNDED = None  # storage capacity of a site without a limit


class NetworkFormatError(ValueError):
    """Raised when a network, request or schedule file cannot be loaded."""


@dataclass(frozen=True)
class Site:
    id: str
    storage: Optional[int] = UNBOUNDED

    @property
    def bounded(self) -> bool:
        return self.storage is not None


@dataclass(frozen=True)
class Link:
    id: str
    src: str
    dst: str
    slowdown: int = 1


@dataclass(frozen=True)
class SharedLinkGroup:
    members: tuple[str, ...]
    capacity: int


@dataclass(frozen=True)
class Network:
    sites: tuple[Site, ...]
    links: tuple[Link, ...]
    shared_groups: tuple[SharedLinkGroup, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "shared_groups", tuple(self.shared_groups))

    @property
    def site_ids(self) -> list[str]:
        return [s.id for s in self.sites]

    def site(self, site_id: str) -> Site:
        for s in self.sites:
            if s.id == site_id:
                return s
        raise KeyError(f"unknown site {site_id!r}")

    def link(self, link_id: str) -> Link:
        for l in self.links:
            if l.id == link_id:
                return l
        raise KeyError(f"unknown link {link_id!r}")

    def link_index(self, link_id: str) -> int:
        for i, l in enumerate(self.links):
            if l.id == link_id:
                return i
        raise KeyError(f"unknown link {link_id!r}")


@dataclass(frozen=True)
class Demand:
    name: str
    origins: frozenset[str]
    size: int = 1

    def __post_init__(self):
        object.__setattr__(self, "origins", frozenset(self.origins))


@dataclass(frozen=True)
class Request:
    destination: str
    demands: tuple[Demand, ...]

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(self.demands))

    def demand(self, name: str) -> Demand:
        for d in self.demands:
            if d.name == name:
                return d
        raise KeyError(f"unknown demand {name!r}")


@dataclass(frozen=True)
class ScheduleEntry:
    demand: str
    link: str
    start: int
    end: int


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def makespan(self) -> int:
        return max((e.end for e in self.entries), default=0)

    def for_demand(self, name: str) -> list[ScheduleEntry]:
        return sorted((e for e in self.entries if e.demand == name), key=lambda e: e.start)

    def for_link(self, link_id: str) -> list[ScheduleEntry]:
        return sorted((e for e in self.entries if e.link == link_id), key=lambda e: e.start)

    def paths(self) -> dict[str, list[ScheduleEntry]]:
        out: dict[str, list[ScheduleEntry]] = {}
        for e in sorted(self.entries, key=lambda e: (e.start, e.end)):
            out.setdefault(e.demand, []).append(e)
        return out


@dataclass
class ValidationResult:
    violations: list[str] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    request: Optional[Request] = None  # request with demands already at the destination dropped
    unreachable: list[str] = field(default_factory=list)  # demand names

    @property
    def ok(self) -> bool:
        return not self.violations


def transfer_duration(demand: Demand, link: Link) -> int:
    return demand.size * link.slowdown


def out_links(network: Network, site: str) -> list[Link]:
    if site not in network.site_ids:
        raise KeyError(f"unknown site {site!r}")
    return [l for l in network.links if l.src == site]


def in_links(network: Network, site: str) -> list[Link]:
    if site not in network.site_ids:
        raise KeyError(f"unknown site {site!r}")
    return [l for l in network.links if l.dst == site]


def _is_pos_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 1


def reachable_to(network: Network, target: str) -> set[str]:
    """Sites having a directed path to ``target`` (including ``target``)."""
    pred: dict[str, list[str]] = {}
    for l in network.links:
        pred.setdefault(l.dst, []).append(l.src)
    seen = {target}
    queue = deque([target])
    while queue:
        n = queue.popleft()
        for p in pred.get(n, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def validate_network(network: Network) -> ValidationResult:
    res = ValidationResult()
    ids: set[str] = set()
    for s in network.sites:
        if not isinstance(s.id, str) or not s.id:
            res.violations.append(f"site id must be a non-empty string, got {s.id!r}")
            continue
        if s.id in ids:
            res.violations.append(f"duplicate site id {s.id!r}")
        ids.add(s.id)
        if s.storage is not None and not _is_pos_int(s.storage):
            res.violations.append(f"site {s.id!r}: storage must be a positive integer or unbounded")

    link_ids: set[str] = set()
    for l in network.links:
        if not isinstance(l.id, str) or not l.id:
            res.violations.append(f"link id must be a non-empty string, got {l.id!r}")
            continue
        if l.id in link_ids:
            res.violations.append(f"duplicate link id {l.id!r}")
        link_ids.add(l.id)
        for end in (l.src, l.dst):
            if end not in ids:
                res.violations.append(f"link {l.id!r}: unknown site {end!r}")
        if l.src == l.dst:
            res.violations.append(f"link {l.id!r}: self-loop at {l.src!r}")
        if not _is_pos_int(l.slowdown):
            res.violations.append(f"link {l.id!r}: slowdown must be a positive integer, got {l.slowdown!r}")

    slowdowns = {l.id: l.slowdown for l in network.links}
    for i, g in enumerate(network.shared_groups):
        if len(set(g.members)) < 2:
            res.violations.append(f"shared group #{i}: needs at least 2 distinct members")
        missing = [m for m in g.members if m not in link_ids]
        if missing:
            res.violations.append(f"shared group #{i}: unknown links {missing}")
        if not _is_pos_int(g.capacity):
            res.violations.append(f"shared group #{i}: capacity must be a positive integer")
        elif not missing:
            weight = sum(slowdowns[m] for m in set(g.members) if _is_pos_int(slowdowns[m]))
            if g.capacity >= weight:
                res.warnings.append(
                    f"shared group #{i}: capacity {g.capacity} >= total consumption {weight}, group never binds"
                )
    return res


def validate(network: Network, request: Optional[Request] = None) -> ValidationResult:
    """Collect every invariant violation of ``network`` and ``request``.

    Demands whose origins already include the destination are dropped with a
    notice; the cleaned request is available as ``result.request``.
    """
    res = validate_network(network)
    if request is None:
        return res
    ids = set(network.site_ids)
    if request.destination not in ids:
        res.violations.append(f"request: unknown destination {request.destination!r}")
    names: set[str] = set()
    kept = []
    reach = reachable_to(network, request.destination) if request.destination in ids else set()
    for d in request.demands:
        if not isinstance(d.name, str) or not d.name:
            res.violations.append(f"demand name must be a non-empty string, got {d.name!r}")
            continue
        if d.name in names:
            res.violations.append(f"duplicate demand name {d.name!r}")
        names.add(d.name)
        if not _is_pos_int(d.size):
            res.violations.append(f"demand {d.name!r}: size must be a positive integer")
        if not d.origins:
            res.violations.append(f"demand {d.name!r}: empty origin set")
            continue
        unknown = sorted(o for o in d.origins if o not in ids)
        if unknown:
            res.violations.append(f"demand {d.name!r}: unknown origin sites {unknown}")
            continue
        if request.destination in d.origins:
            res.notices.append(f"demand {d.name!r} already at destination, dropped")
            continue
        if reach and not (d.origins & reach):
            res.violations.append(f"demand {d.name!r}: unreachable from every origin")
            res.unreachable.append(d.name)
        kept.append(d)
    res.request = Request(request.destination, tuple(kept))
    return res


# --- JSON ingestion ---------------------------------------------------------

def _check_keys(obj, allowed: set[str], required: set[str], where: str):
    if not isinstance(obj, dict):
        raise NetworkFormatError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise NetworkFormatError(f"{where}: unknown keys {unknown}")
    missing = sorted(required - set(obj))
    if missing:
        raise NetworkFormatError(f"{where}: missing keys {missing}")


def _str(v, where: str) -> str:
    if not isinstance(v, str):
        raise NetworkFormatError(f"{where}: expected a string, got {v!r}")
    return v


def _list(v, where: str) -> list:
    if not isinstance(v, list):
        raise NetworkFormatError(f"{where}: expected a list, got {type(v).__name__}")
    return v


def network_from_dict(data) -> Network:
    _check_keys(data, {"sites", "links", "shared_groups"}, {"sites", "links"}, "network")
    sites = []
    for i, s in enumerate(_list(data["sites"], "sites")):
        where = f"sites[{i}]"
        _check_keys(s, {"id", "storage"}, {"id"}, where)
        storage = s.get("storage", "unbounded")
        if storage == "unbounded":
            storage = None
        elif not (isinstance(storage, int) and not isinstance(storage, bool)):
            raise NetworkFormatError(f"{where}.storage: expected integer or 'unbounded', got {storage!r}")
        sites.append(Site(_str(s["id"], f"{where}.id"), storage))
    links = []
    for i, l in enumerate(_list(data["links"], "links")):
        where = f"links[{i}]"
        _check_keys(l, {"id", "from", "to", "slowdown"}, {"id", "from", "to", "slowdown"}, where)
        sd = l["slowdown"]
        if not (isinstance(sd, int) and not isinstance(sd, bool)):
            raise NetworkFormatError(f"{where}.slowdown: expected integer, got {sd!r}")
        links.append(Link(_str(l["id"], f"{where}.id"), _str(l["from"], f"{where}.from"),
                          _str(l["to"], f"{where}.to"), sd))
    groups = []
    for i, g in enumerate(_list(data.get("shared_groups", []), "shared_groups")):
        where = f"shared_groups[{i}]"
        _check_keys(g, {"members", "capacity"}, {"members", "capacity"}, where)
        members = tuple(_str(m, f"{where}.members") for m in _list(g["members"], f"{where}.members"))
        cap = g["capacity"]
        if not (isinstance(cap, int) and not isinstance(cap, bool)):
            raise NetworkFormatError(f"{where}.capacity: expected integer, got {cap!r}")
        groups.append(SharedLinkGroup(members, cap))
    return Network(tuple(sites), tuple(links), tuple(groups))


def request_from_dict(data) -> Request:
    _check_keys(data, {"destination", "demands"}, {"destination", "demands"}, "request")
    demands = []
    for i, d in enumerate(_list(data["demands"], "demands")):
        where = f"demands[{i}]"
        _check_keys(d, {"name", "size", "origins"}, {"name", "origins"}, where)
        size = d.get("size", 1)
        if not (isinstance(size, int) and not isinstance(size, bool)):
            raise NetworkFormatError(f"{where}.size: expected integer, got {size!r}")
        origins = [_str(o, f"{where}.origins") for o in _list(d["origins"], f"{where}.origins")]
        demands.append(Demand(_str(d["name"], f"{where}.name"), frozenset(origins), size))
    return Request(_str(data["destination"], "request.destination"), tuple(demands))


def network_to_dict(network: Network) -> dict:
    return {
        "sites": [{"id": s.id, "storage": "unbounded" if s.storage is None else s.storage}
                  for s in network.sites],
        "links": [{"id": l.id, "from": l.src, "to": l.dst, "slowdown": l.slowdown} for l in network.links],
        "shared_groups": [{"members": list(g.members), "capacity": g.capacity} for g in network.shared_groups],
    }


def request_to_dict(request: Request) -> dict:
    return {
        "destination": request.destination,
        "demands": [{"name": d.name, "size": d.size, "origins": sorted(d.origins)} for d in request.demands],
    }


def _parse_json(text: Union[str, bytes], what: str):
    try:
        return json.loads(text)
    except (ValueError, RecursionError) as exc:  # UnicodeDecodeError is a ValueError
        raise NetworkFormatError(f"{what}: not valid JSON ({exc})") from None


def parse_network(text: Union[str, bytes]) -> Network:
    """Parse and validate a network document; raise NetworkFormatError on any defect."""
    net = network_from_dict(_parse_json(text, "network"))
    res = validate_network(net)
    if not res.ok:
        raise NetworkFormatError("; ".join(res.violations))
    return net


def parse_request(text: Union[str, bytes], network: Optional[Network] = None) -> Request:
    req = request_from_dict(_parse_json(text, "request"))
    if network is None:
        names = [d.name for d in req.demands]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise NetworkFormatError(f"duplicate demand names {dup}")
        bad = [d.name for d in req.demands if d.size < 1 or not d.origins]
        if bad:
            raise NetworkFormatError(f"demands with bad size or empty origins: {bad}")
        return req
    res = validate(network, req)
    if not res.ok:
        raise NetworkFormatError("; ".join(res.violations))
    return res.request


def load_network(path: Union[str, Path]) -> Network:
    return parse_network(Path(path).read_bytes())


def load_request(path: Union[str, Path], network: Optional[Network] = None) -> Request:
    """Load a request; with ``network`` given it is validated against it and cleaned."""
    return parse_request(Path(path).read_bytes(), network)


# --- schedule CSV -----------------------------------------------------------

SCHEDULE_HEADER = ["demand", "link", "from", "to", "start", "end"]


def schedule_to_csv(schedule: Schedule, network: Network, request: Optional[Request] = None) -> str:
    order = {d.name: i for i, d in enumerate(request.demands)} if request else {}
    rows = sorted(schedule.entries, key=lambda e: (order.get(e.demand, len(order)), e.demand, e.start))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCHEDULE_HEADER)
    for e in rows:
        l = network.link(e.link)
        w.writerow([e.demand, e.link, l.src, l.dst, e.start, e.end])
    return buf.getvalue()


def schedule_from_csv(text: str) -> Schedule:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != SCHEDULE_HEADER:
        raise NetworkFormatError(f"schedule: expected header {','.join(SCHEDULE_HEADER)}, got {header}")
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(SCHEDULE_HEADER):
            raise NetworkFormatError(f"schedule line {lineno}: expected 6 fields, got {len(row)}")
        try:
            start, end = int(row[4]), int(row[5])
        except ValueError:
            raise NetworkFormatError(f"schedule line {lineno}: start/end must be integers") from None
        entries.append(ScheduleEntry(row[0], row[1], start, end))
    return Schedule(tuple(entries))


def make_star(slowdowns: Iterable[int], destination: str = "dest", prefix: str = "S") -> Network:
    """Sources ``S1..Sk`` each with one direct link to ``destination``."""
    sites, links = [], []
    for i, sd in enumerate(slowdowns, start=1):
        sites.append(Site(f"{prefix}{i}"))
        links.append(Link(f"{prefix}{i}-{destination}", f"{prefix}{i}", destination, sd))
    sites.append(Site(destination))
    return Network(tuple(sites), tuple(links))
