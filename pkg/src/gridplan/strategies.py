"""Search accelerators: symmetry breaking, chunked decomposition and
time-limited search."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .network import Network, Request, Schedule
from .solver import Budget, FakeTask, Model, ModelConfig, SearchReport, build_model, solve
from .solver.model import symmetry_pairs


class ChunkInfeasible(RuntimeError):
    def __init__(self, index: int, report: SearchReport):
        super().__init__(f"chunk {index} has no schedule ({report.status})")
        self.index = index
        self.report = report


@dataclass(frozen=True)
class ChunkPlan:
    chunk_size: int
    chunks: tuple[tuple[str, ...], ...]


def add_symmetry_breaking(model: Model, request: Optional[Request] = None) -> Model:
    """Order the link choices of interchangeable demands.

    Only direct-connection models are affected; demands are interchangeable
    when they share both origin set and size.  ``request`` is accepted for
    symmetry with ``build_model`` and must match the model's request.
    """
    out = replace(model, config=replace(model.config, symmetry_breaking=True))
    out.symmetry, out.symmetry_classes = symmetry_pairs(out)
    return out


def plan_chunks(request: Request, chunk_size: int, sort_by_cardinality: bool = False) -> ChunkPlan:
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    names = [d.name for d in request.demands]
    if sort_by_cardinality:
        card = {d.name: len(d.origins) for d in request.demands}
        names = sorted(names, key=lambda n: -card[n])  # stable: request order within ties
    chunks = tuple(tuple(names[i:i + chunk_size]) for i in range(0, len(names), chunk_size))
    return ChunkPlan(chunk_size, chunks)


def solve_chunked(network: Network, request: Request, chunk_size: int, config: ModelConfig = ModelConfig(),
                  budget: Optional[Budget] = None,
                  sort_by_cardinality: bool = False) -> tuple[Schedule, list[SearchReport]]:
    """Solve chunk after chunk; earlier transfers become fixed fake tasks."""
    plan = plan_chunks(request, chunk_size, sort_by_cardinality)
    by_name = {d.name: d for d in request.demands}
    entries = []
    fakes: list[FakeTask] = []
    reports = []
    for k, chunk in enumerate(plan.chunks):
        sub = Request(request.destination, tuple(by_name[n] for n in chunk))
        model = build_model(network, sub, config, fakes)
        sched, rep = solve(model, budget)
        reports.append(rep)
        if sched is None:
            raise ChunkInfeasible(k, rep)
        entries.extend(sched.entries)
        fakes.extend(FakeTask(e.link, e.start, e.end, e.demand, by_name[e.demand].size) for e in sched.entries)
    return Schedule(tuple(entries)), reports


def solve_time_limited(network: Network, request: Request, coefficient: float = 100.0,
                       config: ModelConfig = ModelConfig()):
    """Optimal search cut off after ``coefficient`` milliseconds per demand."""
    if coefficient < 0:
        raise ValueError("coefficient must be non-negative")
    model = build_model(network, request, config)
    return solve(model, Budget(time_ms=coefficient * len(model.request.demands)))
