from .model import (ChannelingVar, FakeTask, InfeasibleModel, Model, ModelConfig, RoutingVar,
                    StartVar, build_model)
from .propagators import Conflict, State
from .search import Budget, SearchReport, decode, root_state, solve

__all__ = [
    "Budget", "ChannelingVar", "Conflict", "FakeTask", "InfeasibleModel", "Model", "ModelConfig",
    "RoutingVar", "SearchReport", "StartVar", "State", "build_model", "decode", "root_state", "solve",
]
