from fractions import Fraction

import numpy as np
import pytest

from anonnet.netgraph import (
    ConvergenceError,
    FollowGraph,
    betweenness_centrality,
    compute_centrality,
    degree_centrality,
    eigenvector_centrality,
    fuse_and_rank,
    normalize_betweenness,
    normalize_scores,
    pagerank,
)
from anonnet.netgraph.centrality import CentralityReport, brandes_single_source
from oracles import (
    betweenness_by_enumeration,
    dense_eigenvector,
    dense_pagerank,
    random_digraph,
    random_strongly_connected,
)


def G(nodes, edges):
    return FollowGraph.from_edges(nodes, edges)


def vec(g, scores):
    return np.array([scores[n] for n in g.nodes])


# ------------------------------------------------------------------ degree


def test_degree_star():
    g = G("hxyz", [("x", "h"), ("y", "h"), ("z", "h")])
    d = degree_centrality(g)
    assert d["h"] == 1.0
    assert d["x"] == pytest.approx(1 / 3)


def test_degree_two_cycle_and_isolated():
    assert degree_centrality(G("ab", [("a", "b"), ("b", "a")])) == {"a": 2.0, "b": 2.0}
    assert degree_centrality(G("abc", [("a", "b")]))["c"] == 0.0
    assert degree_centrality(G("a", [])) == {"a": 0.0}


# ------------------------------------------------------------- eigenvector


def test_eigenvector_cycle_uniform():
    nodes = [f"n{i}" for i in range(6)]
    g = G(nodes, [(nodes[i], nodes[(i + 1) % 6]) for i in range(6)])
    v = vec(g, eigenvector_centrality(g))
    assert np.allclose(v, v[0])
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_eigenvector_edgeless_uniform():
    v = list(eigenvector_centrality(G("abc", [])).values())
    assert np.allclose(v, 1 / np.sqrt(3))


def test_eigenvector_five_node_oracle():
    nodes = list("abcde")
    edges = [("a", "b"), ("b", "c"), ("c", "a"), ("d", "a"), ("a", "d"), ("e", "c"), ("c", "e"), ("b", "d")]
    g = G(nodes, edges)
    v = vec(g, eigenvector_centrality(g))
    ref = dense_eigenvector(g.nodes, edges)
    assert float(v @ ref) > 1 - 1e-6


def test_eigenvector_random_oracle():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n = int(rng.integers(2, 9))
        nodes, edges = random_strongly_connected(rng, n, 0.3)
        g = G(nodes, edges)
        v = vec(g, eigenvector_centrality(g))
        ref = dense_eigenvector(g.nodes, edges)
        assert float(v @ ref) > 1 - 1e-6


def test_eigenvector_nonconvergence_reported():
    nodes = [f"n{i}" for i in range(6)]
    g = G(nodes, [(nodes[i], nodes[(i + 1) % 6]) for i in range(6)] + [("n0", "n3")])
    with pytest.raises(ConvergenceError):
        eigenvector_centrality(g, max_iter=2)


# ---------------------------------------------------------------- pagerank


def test_pagerank_small_cases():
    assert pagerank(G("a", [])) == {"a": pytest.approx(1.0)}
    pr = pagerank(G("ab", [("a", "b"), ("b", "a")]))
    assert pr["a"] == pytest.approx(0.5) and pr["b"] == pytest.approx(0.5)


def test_pagerank_chain_oracle():
    edges = [("a", "b"), ("b", "c")]
    g = G("abc", edges)
    assert np.allclose(vec(g, pagerank(g)), dense_pagerank(g.nodes, edges), atol=1e-8)


def test_pagerank_random_oracle_and_sum():
    rng = np.random.default_rng(2)
    for _ in range(50):
        nodes, edges = random_digraph(rng, int(rng.integers(1, 9)), 0.25)
        g = G(nodes, edges)
        pr = vec(g, pagerank(g))
        assert abs(pr.sum() - 1) <= 1e-6
        assert (pr > 0).all()
        assert np.allclose(pr, dense_pagerank(g.nodes, edges), atol=1e-8)


# ------------------------------------------------------------- betweenness


def test_betweenness_path_and_complete():
    bc = betweenness_centrality(G("abc", [("a", "b"), ("b", "c")]))
    assert bc == {"a": 0.0, "b": 1.0, "c": 0.0}
    nodes = "abcd"
    full = G(nodes, [(u, v) for u in nodes for v in nodes if u != v])
    assert set(betweenness_centrality(full).values()) == {0.0}


def test_betweenness_random_vs_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(40):
        nodes, edges = random_digraph(rng, int(rng.integers(2, 8)), 0.35)
        g = G(nodes, edges)
        bc = betweenness_centrality(g)
        ref, counts = betweenness_by_enumeration(g.nodes, edges)
        for node in g.nodes:
            assert bc[node] == float(ref[node])  # exact sum, rounded once
        for s in range(g.n):
            sigma, dist, num, L = brandes_single_source(g.out_adj, s)
            for t in range(g.n):
                if t != s:
                    assert sigma[t] == counts[(g.nodes[s], g.nodes[t])]


def test_betweenness_workers_agree():
    rng = np.random.default_rng(4)
    nodes, edges = random_digraph(rng, 40, 0.1)
    g = G(nodes, edges)
    a = vec(g, betweenness_centrality(g, workers=1))
    b = vec(g, betweenness_centrality(g, workers=3))
    assert np.array_equal(a, b)


def test_normalize_betweenness():
    assert normalize_betweenness({"b": 1.0}, 3) == {"b": 0.5}
    assert normalize_betweenness({"a": 0.0, "b": 0.0}, 2) == {"a": 0.0, "b": 0.0}


# ----------------------------------------------------------- normalization


def test_normalize_examples():
    assert list(normalize_scores({"a": 1, "b": 3, "c": 5}).values()) == [0.0, 0.5, 1.0]
    assert normalize_scores({"a": 7, "b": 7}) == {"a": 0.0, "b": 0.0}
    already = {"a": 0.0, "b": 0.25, "c": 1.0}
    assert normalize_scores(already) == already
    with pytest.raises(ValueError):
        normalize_scores({})


def test_normalize_affine_invariance():
    rng = np.random.default_rng(5)
    for _ in range(200):
        # dyadic values with small integer a, b keep a*v + b exact in floats
        raw = {f"n{i}": float(x) / 1024 for i, x in enumerate(rng.integers(0, 4096, 10))}
        a, b = float(rng.integers(1, 50)), float(rng.integers(-20, 20))
        scaled = {k: a * v + b for k, v in raw.items()}
        assert all(Fraction(scaled[k]) == Fraction(a) * Fraction(v) + Fraction(b) for k, v in raw.items())
        assert normalize_scores(scaled) == normalize_scores(raw)


# ------------------------------------------------------------------ fusion


def _norm(**cols):
    return {m: dict(zip("abc", cols[m])) for m in ("degree", "eigenvector", "pagerank", "betweenness")}


def test_fuse_examples():
    rep = fuse_and_rank(_norm(degree=(1, 1, 0), eigenvector=(1, 0, 0), pagerank=(1, 0, 0), betweenness=(1, 0, 0)))
    assert rep.rows[0].account == "a" and rep.rows[0].fused == 1.0 and rep.rows[0].rank == 1
    assert rep.by_account()["b"].fused == 0.25


def test_fuse_tie_lower_id_first():
    rep = fuse_and_rank(_norm(degree=(0, 1, 1), eigenvector=(0, 0, 0), pagerank=(0, 0, 0), betweenness=(0, 0, 0)))
    assert rep.top_k(3) == ["b", "c", "a"]


def test_fuse_node_mismatch():
    cols = _norm(degree=(1, 0, 0), eigenvector=(1, 0, 0), pagerank=(1, 0, 0), betweenness=(1, 0, 0))
    cols["pagerank"] = {"a": 1.0, "b": 0.0}
    with pytest.raises(ValueError):
        fuse_and_rank(cols)


def test_report_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    nodes, edges = random_strongly_connected(rng, 8, 0.3)
    rep = compute_centrality(G(nodes, edges))
    rep.write(tmp_path / "c.tsv")
    assert CentralityReport.read(tmp_path / "c.tsv") == rep
    assert [r.rank for r in rep.rows] == list(range(1, 9))
    assert len(rep.score_curves()) == 5 * 8
