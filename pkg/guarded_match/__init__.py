"""
guarded_match package

This package contains the graph model, candidate filtering, reservation and
nogood guards, the guarded backtracking search, the brute-force oracle and the
pipeline/CLI/API surfaces built on them.
"""

from .config import MatchConfig
from .graph import Graph
from .search import MatchResult, MatchStats, Termination, match_query

__all__ = [
    "Graph",
    "MatchConfig",
    "MatchResult",
    "MatchStats",
    "Termination",
    "match_query",
]
