"""Depth-first branch and bound over the routing and timing model."""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from typing import Optional

from ..network import Schedule, ScheduleEntry
from .model import Model
from .propagators import Conflict, State, propagate


@dataclass(frozen=True)
class Budget:
    time_ms: Optional[float] = None
    nodes: Optional[int] = None


@dataclass
class SearchReport:
    nodes: int = 0
    backtracks: int = 0
    wall_time: float = 0.0  # seconds
    proven_optimal: bool = False
    best_makespan: Optional[int] = None
    # "optimal", "feasible" (budget hit after an incumbent), "infeasible", "budget" (no incumbent)
    status: str = "unknown"

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "backtracks": self.backtracks,
            "wall_ms": round(self.wall_time * 1000.0, 3),
            "proven_optimal": self.proven_optimal,
            "makespan": self.best_makespan,
            "status": self.status,
        }


class _Stop(Exception):
    pass


class _Search:
    def __init__(self, model: Model, budget: Budget):
        self.m = model
        self.budget = budget
        self.nodes = 0
        self.backtracks = 0
        self.best: Optional[State] = None
        self.best_makespan: Optional[int] = None
        self.ub = model.horizon
        self.deadline = None
        if budget.time_ms is not None:
            self.deadline = time.perf_counter() + budget.time_ms / 1000.0

    def _tick(self):
        if self.deadline is not None and time.perf_counter() >= self.deadline:
            raise _Stop
        if self.budget.nodes is not None and self.nodes >= self.budget.nodes:
            raise _Stop
        self.nodes += 1

    def node(self, st: State):
        self._tick()
        try:
            propagate(self.m, st, self.ub)
        except Conflict:
            self.backtracks += 1
            return
        x = st.x
        # goal 1: routing variables, declaration order breaks the all-equal domain sizes
        for t in range(len(x)):
            if x[t] == -1:
                for v in (0, 1):
                    child = st.copy()
                    child.x[t] = v
                    if v == 1 and child.lo[t] > child.hi[t]:
                        continue
                    self.node(child)
                return
        # goal 2: start times of used transfers, smallest domain first
        lo, hi, dur = st.lo, st.hi, st.dur
        pick, width = -1, None
        for t in range(len(x)):
            if x[t] == 1:
                w = hi[t] - lo[t]
                if w > 0 and (width is None or w < width):
                    pick, width = t, w
        if pick < 0:
            self._record(st)
            return
        v = lo[pick]
        while v <= hi[pick] and v + dur[pick] <= self.ub:
            child = st.copy()
            child.lo[pick] = child.hi[pick] = v
            self.node(child)
            v += 1

    def _record(self, st: State):
        ms = max((st.lo[t] + st.dur[t] for t in range(len(st.x)) if st.x[t] == 1), default=0)
        self.best = st.copy()
        self.best_makespan = ms
        self.ub = ms - 1


def root_state(model: Model) -> State:
    return State(model.x0[:], [0] * model.n_tasks, [model.horizon - d for d in model.t_dur], model.t_dur)


def solve(model: Model, budget: Optional[Budget] = None) -> tuple[Optional[Schedule], SearchReport]:
    """Minimise makespan; returns the best schedule found and a search report."""
    budget = budget or Budget()
    search = _Search(model, budget)
    n = model.n_tasks
    root = root_state(model)
    report = SearchReport()
    t0 = time.perf_counter()
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 1000))
    exhausted = False
    try:
        search.node(root)
        exhausted = True
    except _Stop:
        pass
    finally:
        sys.setrecursionlimit(limit)
    report.wall_time = time.perf_counter() - t0
    report.nodes = search.nodes
    report.backtracks = search.backtracks
    report.best_makespan = search.best_makespan
    if search.best is not None:
        report.proven_optimal = exhausted
        report.status = "optimal" if exhausted else "feasible"
        return decode(model, search.best), report
    report.status = "infeasible" if exhausted else "budget"
    return None, report


def decode(model: Model, st: State) -> Schedule:
    entries = []
    for t in range(model.n_tasks):
        if st.x[t] == 1:
            entries.append(ScheduleEntry(model.request.demands[model.t_demand[t]].name,
                                         model.network.links[model.t_link[t]].id,
                                         st.lo[t], st.lo[t] + st.dur[t]))
    order = {d.name: i for i, d in enumerate(model.request.demands)}
    entries.sort(key=lambda e: (order[e.demand], e.start))
    return Schedule(tuple(entries))
