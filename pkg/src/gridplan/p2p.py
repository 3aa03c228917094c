"""Peer-to-peer baseline: one observer per link into the destination, each
pulling the rarest file still available at its source site.

Ties between equally rare files are broken with numpy's PCG64 generator
seeded by ``seed`` (``numpy.random.default_rng``), so a seed fixes the whole
trace on every platform.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .network import Network, Request, Schedule, ScheduleEntry, validate


@dataclass
class ObserverState:
    link: str
    source: str
    slowdown: int
    busy_until: Optional[int] = None  # None while idle


@dataclass
class SimState:
    clock: int
    remaining: dict[str, frozenset[str]]  # demand -> sites still listing it
    in_flight: set[tuple[str, str, int]] = field(default_factory=set)
    done: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class TraceEvent:
    time: int
    link: str
    kind: str  # "pick" or "done"
    demand: str
    cardinality: Optional[int] = None

    def __str__(self) -> str:
        if self.kind == "pick":
            return f"t={self.time} link={self.link} pick={self.demand} card={self.cardinality}"
        return f"t={self.time} link={self.link} done={self.demand}"


def simulate(network: Network, request: Request, seed: int = 0) -> tuple[Schedule, list[TraceEvent]]:
    res = validate(network, request)
    if not res.ok:
        raise ValueError("; ".join(res.violations))
    request = res.request
    dest = request.destination
    observers = [ObserverState(l.id, l.src, l.slowdown) for l in network.links if l.dst == dest]
    feeding = {o.source for o in observers}
    stranded = [d.name for d in request.demands if not (d.origins & feeding)]
    if stranded:
        raise ValueError(f"P2P needs direct connections; no origin adjacent to {dest!r} for {stranded}")

    rng = np.random.default_rng(seed)
    order = [d.name for d in request.demands]
    size = {d.name: d.size for d in request.demands}
    state = SimState(0, {d.name: d.origins for d in request.demands})
    events: list[tuple[int, int]] = []  # (time, observer index) completions
    running: dict[int, tuple[str, int, int]] = {}
    entries: list[ScheduleEntry] = []
    trace: list[TraceEvent] = []

    while True:
        for i, obs in enumerate(observers):
            if obs.busy_until is not None:
                continue
            pool = [n for n in order if n in state.remaining and obs.source in state.remaining[n]]
            if not pool:
                continue
            card = min(len(state.remaining[n]) for n in pool)
            rarest = [n for n in pool if len(state.remaining[n]) == card]
            pick = rarest[int(rng.integers(len(rarest)))] if len(rarest) > 1 else rarest[0]
            del state.remaining[pick]
            end = state.clock + size[pick] * obs.slowdown
            obs.busy_until = end
            state.in_flight.add((pick, obs.link, end))
            running[i] = (pick, state.clock, end)
            heapq.heappush(events, (end, i))
            trace.append(TraceEvent(state.clock, obs.link, "pick", pick, card))
        if not events:
            break
        state.clock = events[0][0]
        while events and events[0][0] == state.clock:
            _, i = heapq.heappop(events)
            obs = observers[i]
            pick, start, end = running.pop(i)
            state.in_flight.discard((pick, obs.link, end))
            state.done.add(pick)
            obs.busy_until = None
            entries.append(ScheduleEntry(pick, obs.link, start, end))
            trace.append(TraceEvent(state.clock, obs.link, "done", pick))
    return Schedule(tuple(entries)), trace


def format_trace(trace: list[TraceEvent]) -> str:
    return "".join(f"{e}\n" for e in trace)
