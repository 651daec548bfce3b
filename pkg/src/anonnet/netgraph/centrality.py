"""Degree, eigenvector, PageRank and betweenness centrality, plus fusion.

Raw scores are returned as dicts keyed by node id.  ``normalize_scores``
min-max scales one measure; ``fuse_and_rank`` averages the four normalized
measures and ranks by fused score descending, then node id ascending.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from .graph import FollowGraph, GraphError

MEASURES = ("degree", "eigenvector", "pagerank", "betweenness")


class ConvergenceError(ArithmeticError):
    def __init__(self, method: str, iterations: int):
        super().__init__(f"{method} did not converge within {iterations} iterations")
        self.method = method
        self.iterations = iterations


def _as_dict(g: FollowGraph, values) -> dict[str, float]:
    return {node: float(values[i]) for i, node in enumerate(g.nodes)}


def degree_centrality(g: FollowGraph, mode: str = "total") -> dict[str, float]:
    """(in + out) / (n - 1); ``mode`` may also be "in" or "out".

    Total degree can exceed 1 in graphs with reciprocal follows.
    """
    if g.n <= 1:
        return {node: 0.0 for node in g.nodes}
    scale = 1.0 / (g.n - 1)
    out = {}
    for i, node in enumerate(g.nodes):
        d_in, d_out = len(g.in_adj[i]), len(g.out_adj[i])
        d = {"total": d_in + d_out, "in": d_in, "out": d_out}[mode]
        out[node] = d * scale
    return out


def eigenvector_centrality(
    g: FollowGraph, tol: float = 1e-8, max_iter: int = 1000, transpose: bool = False
) -> dict[str, float]:
    """Power iteration where a node's score sums its followers' scores.

    Iterates with A^T + I, which shares the dominant eigenvector of A^T but
    does not oscillate on periodic graphs.  The result has unit L2 norm.  With
    ``transpose`` a node's score sums the scores of the accounts it follows.
    An edgeless graph yields the uniform vector.
    """
    if g.n == 0:
        raise GraphError("empty graph")
    pull = g.out_adj if transpose else g.in_adj
    x = np.full(g.n, 1.0 / math.sqrt(g.n))
    for _ in range(max_iter):
        new = x.copy()
        for v, preds in enumerate(pull):
            if preds:
                new[v] += x[preds].sum()
        norm = np.linalg.norm(new)
        if norm == 0:
            raise ConvergenceError("eigenvector centrality", max_iter)
        new /= norm
        if np.abs(new - x).sum() < tol:
            return _as_dict(g, new)
        x = new
    raise ConvergenceError("eigenvector centrality", max_iter)


def pagerank(g: FollowGraph, damping: float = 0.85, tol: float = 1e-9, max_iter: int = 200) -> dict[str, float]:
    """Damped random surfer following follow edges; dangling mass is spread uniformly."""
    if g.n == 0:
        raise GraphError("empty graph")
    n = g.n
    out_deg = np.array([len(s) for s in g.out_adj], dtype=np.float64)
    dangling = out_deg == 0
    src = np.array([u for u, succ in enumerate(g.out_adj) for _ in succ], dtype=np.int64)
    dst = np.array([v for succ in g.out_adj for v in succ], dtype=np.int64)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        contrib = np.zeros(n)
        if len(src):
            np.add.at(contrib, dst, x[src] / out_deg[src])
        new = damping * (contrib + x[dangling].sum() / n) + (1.0 - damping) / n
        new /= new.sum()
        if np.abs(new - x).sum() < tol:
            return _as_dict(g, new)
        x = new
    raise ConvergenceError("pagerank", max_iter)


# -------------------------------------------------------------- betweenness


def brandes_single_source(out_adj, s: int):
    """Shortest-path counts and exact dependencies from source ``s``.

    Returns ``(sigma, dist, num, L)`` where the dependency of v on s is
    exactly ``num[v] / L``.  L is the lcm of the path counts, so the
    back-propagation stays in integers.
    """
    n = len(out_adj)
    sigma = [0] * n
    dist = [-1] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma[s] = 1
    dist[s] = 0
    order = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in out_adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    L = math.lcm(*(sigma[w] for w in order))
    # E[v] = L/sigma[v] + sum of E over v's successors on shortest paths
    E = [0] * n
    for w in reversed(order):
        E[w] += L // sigma[w]
        for v in preds[w]:
            E[v] += E[w]
    num = [0] * n
    for v in order[1:]:
        num[v] = sigma[v] * E[v] - L
    return sigma, dist, num, L


def _betweenness_chunk(args):
    """Integer dependency sums for a block of sources, grouped by denominator."""
    out_adj, sources = args
    by_denominator: dict[int, list[int]] = {}
    for s in sources:
        _, _, num, L = brandes_single_source(out_adj, s)
        acc = by_denominator.get(L)
        if acc is None:
            acc = by_denominator[L] = [0] * len(out_adj)
        for v, x in enumerate(num):
            if x:
                acc[v] += x
    return by_denominator


def betweenness_centrality(g: FollowGraph, workers: int = 1) -> dict[str, float]:
    """Raw (unnormalized) directed betweenness by Brandes accumulation.

    Sums are exact rationals rounded once to float, so the result does not
    depend on accumulation order or on ``workers``.  With ``workers > 1``
    sources are split into contiguous blocks.
    """
    n = g.n
    if workers <= 1 or n < 2 * workers:
        parts = [_betweenness_chunk((g.out_adj, range(n)))]
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        jobs = [(g.out_adj, range(bounds[i], bounds[i + 1])) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_betweenness_chunk, jobs))
    merged: dict[int, list[int]] = {}
    for part in parts:
        for L, acc in part.items():
            tgt = merged.setdefault(L, [0] * n)
            for v, x in enumerate(acc):
                tgt[v] += x
    totals = [Fraction(0)] * n
    for L in sorted(merged):
        for v, x in enumerate(merged[L]):
            if x:
                totals[v] += Fraction(x, L)
    return _as_dict(g, [float(t) for t in totals])


def normalize_betweenness(raw: Mapping[str, float], n: int) -> dict[str, float]:
    """Standard directed scaling by 1 / ((n-1)(n-2))."""
    scale = 1.0 / ((n - 1) * (n - 2)) if n > 2 else 0.0
    return {k: v * scale for k, v in raw.items()}


# ---------------------------------------------------------- normalization


def normalize_scores(raw: Mapping[str, float]) -> dict[str, float]:
    """Min-max scale to [0, 1]; a constant input maps to all zeros.

    Computed in exact rational arithmetic and rounded once, so any exact
    positive affine transform of the input yields identical output.
    """
    if not raw:
        raise ValueError("no scores to normalize")
    exact = {k: Fraction(v) for k, v in raw.items()}
    lo, hi = min(exact.values()), max(exact.values())
    if lo == hi:
        return {k: 0.0 for k in raw}
    span = hi - lo
    return {k: float((v - lo) / span) for k, v in exact.items()}


@dataclass(frozen=True)
class CentralityRow:
    account: str
    raw: tuple[float, float, float, float]
    normalized: tuple[float, float, float, float]
    fused: float
    rank: int


@dataclass
class CentralityReport:
    rows: list[CentralityRow]  # in rank order

    def by_account(self) -> dict[str, CentralityRow]:
        return {r.account: r for r in self.rows}

    def fused(self) -> dict[str, float]:
        return {r.account: r.fused for r in self.rows}

    def top_k(self, k: int) -> list[str]:
        return [r.account for r in self.rows[:k]]

    def measure(self, name: str, normalized: bool = False) -> dict[str, float]:
        i = MEASURES.index(name)
        return {r.account: (r.normalized if normalized else r.raw)[i] for r in self.rows}

    def write(self, path) -> None:
        header = ["account", *(f"{m}_raw" for m in MEASURES), *(f"{m}_norm" for m in MEASURES), "fused", "rank"]
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(header)
            for r in self.rows:
                w.writerow([r.account, *map(repr, r.raw), *map(repr, r.normalized), repr(r.fused), r.rank])

    @classmethod
    def read(cls, path) -> "CentralityReport":
        rows = []
        with Path(path).open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter="\t")
            next(reader)
            for rec in reader:
                vals = [float(v) for v in rec[1:10]]
                rows.append(CentralityRow(rec[0], tuple(vals[:4]), tuple(vals[4:8]), vals[8], int(rec[10])))
        return cls(rows)

    def score_curves(self) -> list[tuple[str, int, float]]:
        """(measure, rank within measure, normalized score) for every measure and the fused score."""
        out = []
        for i, m in enumerate(MEASURES):
            vals = sorted((r.normalized[i] for r in self.rows), reverse=True)
            out += [(m, k + 1, v) for k, v in enumerate(vals)]
        out += [("fused", r.rank, r.fused) for r in self.rows]
        return out


def fuse_and_rank(normalized: Mapping[str, Mapping[str, float]], raw: Mapping[str, Mapping[str, float]] | None = None) -> CentralityReport:
    """Average four normalized measures per account and rank."""
    missing = [m for m in MEASURES if m not in normalized]
    if missing:
        raise ValueError(f"missing measure(s): {missing}")
    nodes = set(normalized[MEASURES[0]])
    for m in MEASURES[1:]:
        if set(normalized[m]) != nodes:
            raise ValueError(f"node set of {m} differs from {MEASURES[0]}")
    raw = raw or normalized
    fused = {}
    for node in nodes:
        s = 0.0
        for m in MEASURES:
            s += normalized[m][node]
        fused[node] = s / len(MEASURES)
    ordered = sorted(nodes, key=lambda node: (-fused[node], node))
    rows = [
        CentralityRow(
            node,
            tuple(float(raw[m][node]) for m in MEASURES),
            tuple(float(normalized[m][node]) for m in MEASURES),
            fused[node],
            rank,
        )
        for rank, node in enumerate(ordered, start=1)
    ]
    return CentralityReport(rows)


@dataclass(frozen=True)
class CentralityParams:
    degree_mode: str = "total"
    eigen_tol: float = 1e-8
    eigen_max_iter: int = 1000
    eigen_transpose: bool = False
    damping: float = 0.85
    pagerank_tol: float = 1e-9
    pagerank_max_iter: int = 200


def compute_centrality(g: FollowGraph, params: CentralityParams = CentralityParams(), workers: int = 1) -> CentralityReport:
    raw = {
        "degree": degree_centrality(g, params.degree_mode),
        "eigenvector": eigenvector_centrality(g, params.eigen_tol, params.eigen_max_iter, params.eigen_transpose),
        "pagerank": pagerank(g, params.damping, params.pagerank_tol, params.pagerank_max_iter),
        "betweenness": betweenness_centrality(g, workers),
    }
    normalized = {m: normalize_scores(v) for m, v in raw.items()}
    return fuse_and_rank(normalized, raw)
