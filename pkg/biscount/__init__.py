"""Counting independent sets in dense regular bipartite graphs."""

from biscount.bigraph import (
    BipartiteGraph,
    Part,
    VertexSet,
    generate_regular,
    read_graph,
    write_graph,
)
from biscount.config import RunConfig
from biscount.engine import ApproxResult, Method, brute_force_count, count_bis

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph",
    "Part",
    "VertexSet",
    "generate_regular",
    "read_graph",
    "write_graph",
    "RunConfig",
    "ApproxResult",
    "Method",
    "brute_force_count",
    "count_bis",
]
