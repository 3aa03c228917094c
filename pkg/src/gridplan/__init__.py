"""Planning of file transfers from replicated sources to a destination site."""
from .network import (Demand, Link, Network, Request, Schedule, ScheduleEntry, SharedLinkGroup, Site,
                      load_network, load_request, transfer_duration, validate)
from .p2p import simulate
from .replay import replay
from .solver import Budget, ModelConfig, build_model, solve
from .strategies import solve_chunked, solve_time_limited

__all__ = [
    "Budget", "Demand", "Link", "ModelConfig", "Network", "Request", "Schedule", "ScheduleEntry",
    "SharedLinkGroup", "Site", "build_model", "load_network", "load_request", "replay", "simulate",
    "solve", "solve_chunked", "solve_time_limited", "transfer_duration", "validate",
]
