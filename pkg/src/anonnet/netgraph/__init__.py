from .centrality import (
    MEASURES,
    CentralityParams,
    CentralityReport,
    CentralityRow,
    ConvergenceError,
    betweenness_centrality,
    compute_centrality,
    degree_centrality,
    eigenvector_centrality,
    fuse_and_rank,
    normalize_betweenness,
    normalize_scores,
    pagerank,
)
from .graph import FollowGraph, GraphError, Subgraph, build_graph, read_graph, top_k_subgraph, write_graph
from .snowball import SnowballError, SnowballRun, snowball_expand
from .temporal import TemporalReport, temporal_report

__all__ = [
    "MEASURES", "CentralityParams", "CentralityReport", "CentralityRow", "ConvergenceError",
    "betweenness_centrality", "compute_centrality", "degree_centrality", "eigenvector_centrality",
    "fuse_and_rank", "normalize_betweenness", "normalize_scores", "pagerank", "FollowGraph",
    "GraphError", "Subgraph", "build_graph", "read_graph", "top_k_subgraph", "write_graph",
    "SnowballError", "SnowballRun", "snowball_expand", "TemporalReport", "temporal_report",
]
