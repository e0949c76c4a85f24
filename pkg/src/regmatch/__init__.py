"""Distributed matching algorithms on regular graphs, with oracles and lower-bound gadgets."""

from .errors import (
    ConfigError,
    ConstructionError,
    DomainError,
    InvalidMatchingError,
    NotAugmentingError,
    NotBipartiteError,
    NotRegularError,
    ParityError,
    ProbabilityOverflowError,
    RegMatchError,
    SpecViolationError,
    TooLargeError,
    UnfinishedTraceError,
)
from .fast import approx_match_fast, maximal_match_node_avg
from .graph import Graph, gen_regular_bipartite, gen_regular_general, read_edge_list, validate, write_edge_list
from .luby import luby_round_distributed, luby_round_sequential, multi_round_luby, tv_distance_estimate
from .matching import Matching
from .oracle import max_matching_bipartite, max_matching_exact_small
from .schedules import param_schedules
from .sim import run_rounds
from .warmup import constant_match, warmup_full

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConstructionError",
    "DomainError",
    "Graph",
    "InvalidMatchingError",
    "Matching",
    "NotAugmentingError",
    "NotBipartiteError",
    "NotRegularError",
    "ParityError",
    "ProbabilityOverflowError",
    "RegMatchError",
    "SpecViolationError",
    "TooLargeError",
    "UnfinishedTraceError",
    "approx_match_fast",
    "constant_match",
    "gen_regular_bipartite",
    "gen_regular_general",
    "luby_round_distributed",
    "luby_round_sequential",
    "max_matching_bipartite",
    "max_matching_exact_small",
    "maximal_match_node_avg",
    "multi_round_luby",
    "param_schedules",
    "read_edge_list",
    "run_rounds",
    "tv_distance_estimate",
    "validate",
    "warmup_full",
    "write_edge_list",
]
