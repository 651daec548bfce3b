"""Directed follower graph.  An edge p -> q means p follows q."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ..ingest import FollowEdge

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


@dataclass
class FollowGraph:
    nodes: list[str]
    out_adj: list[list[int]]
    in_adj: list[list[int]]
    dropped_edges: int = 0
    index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {n: i for i, n in enumerate(self.nodes)}

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> "FollowGraph":
        node_list = sorted(set(nodes))
        index = {n: i for i, n in enumerate(node_list)}
        out_sets: list[set[int]] = [set() for _ in node_list]
        dropped = 0
        for u, v in edges:
            if u not in index or v not in index:
                dropped += 1
                continue
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            out_sets[index[u]].add(index[v])
        out_adj = [sorted(s) for s in out_sets]
        in_adj: list[list[int]] = [[] for _ in node_list]
        for u, succ in enumerate(out_adj):
            for v in succ:
                in_adj[v].append(u)
        return cls(node_list, out_adj, in_adj, dropped, index)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self.out_adj)

    def edges(self) -> list[tuple[str, str]]:
        return [(self.nodes[u], self.nodes[v]) for u, succ in enumerate(self.out_adj) for v in succ]

    def has_edge(self, u: str, v: str) -> bool:
        return self.index[v] in self.out_adj[self.index[u]]

    def in_degree(self, node: str) -> int:
        return len(self.in_adj[self.index[node]])

    def out_degree(self, node: str) -> int:
        return len(self.out_adj[self.index[node]])

    def subgraph(self, keep: Iterable[str]) -> "FollowGraph":
        keep = set(keep)
        return FollowGraph.from_edges(keep, [(u, v) for u, v in self.edges() if u in keep and v in keep])

    def relabel(self, mapping: Mapping[str, str]) -> "FollowGraph":
        return FollowGraph.from_edges((mapping[n] for n in self.nodes), ((mapping[u], mapping[v]) for u, v in self.edges()))


def build_graph(edges: Iterable[FollowEdge], node_filter) -> FollowGraph:
    """Graph induced on ``node_filter``; other edges are dropped and counted."""
    node_filter = set(node_filter)
    if not node_filter:
        raise GraphError("empty node filter")
    g = FollowGraph.from_edges(node_filter, ((e.follower_id, e.followee_id) for e in edges))
    if g.dropped_edges:
        logger.info("dropped %d edge(s) with an endpoint outside the node filter", g.dropped_edges)
    return g


def write_graph(g: FollowGraph, path) -> None:
    """Node list then edge list, tab separated, in one file."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        for node in g.nodes:
            w.writerow(["node", node])
        for u, v in g.edges():
            w.writerow(["edge", u, v])


def read_graph(path) -> FollowGraph:
    nodes, edges = [], []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row:
                continue
            if row[0] == "node" and len(row) == 2:
                nodes.append(row[1])
            elif row[0] == "edge" and len(row) == 3:
                edges.append((row[1], row[2]))
            else:
                raise GraphError(f"{path}: line {lineno}: malformed graph row")
    return FollowGraph.from_edges(nodes, edges)


@dataclass
class Subgraph:
    graph: FollowGraph
    scores: dict[str, float]

    def write(self, nodes_path, edges_path) -> None:
        """Gephi-style node and edge tables (``Id,Label,score`` / ``Source,Target,Type``)."""
        with Path(nodes_path).open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["Id", "Label", "score"])
            for node in self.graph.nodes:
                w.writerow([node, node, repr(self.scores[node])])
        with Path(edges_path).open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["Source", "Target", "Type"])
            for u, v in self.graph.edges():
                w.writerow([u, v, "Directed"])


def top_k_nodes(scores: Mapping[str, float], k: int) -> list[str]:
    return sorted(scores, key=lambda n: (-scores[n], n))[:k]


def top_k_subgraph(g: FollowGraph, scores: Mapping[str, float], k: int) -> Subgraph:
    if k <= 0:
        raise GraphError("k must be positive")
    if k > g.n:
        logger.warning("k=%d exceeds node count %d; clamping", k, g.n)
        k = g.n
    keep = top_k_nodes({n: scores[n] for n in g.nodes}, k)
    sub = g.subgraph(keep)
    return Subgraph(sub, {n: float(scores[n]) for n in sub.nodes})
