"""Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

Randomness comes from a numpy Generator seeded by the caller: one uniform
draw per token per sweep, consumed in corpus order by the compiled sampling
kernel.  The same seed therefore gives the same chain on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .preprocess import TokenizedCorpus


class LDAError(ValueError):
    pass


@dataclass
class TopicModel:
    K: int
    phi: np.ndarray  # K x V, rows sum to 1
    theta: np.ndarray  # D x K, rows sum to 1
    alpha: float
    beta: float
    iterations: int
    rng_seed: int
    vocabulary: list[str]
    coherence: float | None = None

    def top_word_ids(self, topic: int, n: int = 10) -> list[int]:
        if not 0 <= topic < self.K:
            raise IndexError(f"topic {topic} out of range for K={self.K}")
        row = self.phi[topic]
        # descending probability, ascending token id on ties
        return sorted(range(len(row)), key=lambda w: (-row[w], w))[:n]


@numba.njit(cache=True)
def _sweep(words, docs, z, n_dk, n_kw, n_k, alpha, beta, vbeta, uniforms):
    K = n_k.shape[0]
    p = np.empty(K)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        n_dk[d, k] -= 1
        n_kw[k, w] -= 1
        n_k[k] -= 1
        total = 0.0
        for t in range(K):
            total += (n_dk[d, t] + alpha) * (n_kw[t, w] + beta) / (n_k[t] + vbeta)
            p[t] = total
        u = uniforms[i] * total
        k = 0
        while k < K - 1 and p[k] <= u:
            k += 1
        z[i] = k
        n_dk[d, k] += 1
        n_kw[k, w] += 1
        n_k[k] += 1


def lda_fit(
    corpus: TokenizedCorpus,
    K: int,
    iterations: int = 1000,
    alpha: float | None = None,
    beta: float = 0.01,
    seed: int = 0,
    check_invariants: bool = False,
) -> TopicModel:
    """Fit LDA; ``alpha`` defaults to 50 / K."""
    if K < 1:
        raise LDAError("K must be at least 1")
    if not corpus.documents:
        raise LDAError("empty corpus")
    n_tokens = corpus.n_tokens
    if K > n_tokens:
        raise LDAError(f"K={K} exceeds the corpus token count {n_tokens}")
    if alpha is None:
        alpha = 50.0 / K
    V = len(corpus.vocabulary)
    D = len(corpus.documents)
    words = np.concatenate([np.asarray(d, dtype=np.int64) for d in corpus.documents])
    docs = np.concatenate([np.full(len(d), j, dtype=np.int64) for j, d in enumerate(corpus.documents)])

    rng = np.random.default_rng(seed)
    z = rng.integers(0, K, size=n_tokens).astype(np.int64)
    n_dk = np.zeros((D, K), dtype=np.int64)
    n_kw = np.zeros((K, V), dtype=np.int64)
    np.add.at(n_dk, (docs, z), 1)
    np.add.at(n_kw, (z, words), 1)
    n_k = n_kw.sum(axis=1)

    for _ in range(iterations):
        _sweep(words, docs, z, n_dk, n_kw, n_k, float(alpha), float(beta), V * float(beta), rng.random(n_tokens))
        if check_invariants:
            assert n_kw.sum() == n_tokens and n_k.sum() == n_tokens and n_dk.sum() == n_tokens
            assert (n_kw.sum(axis=1) == n_k).all() and (n_kw >= 0).all() and (n_dk >= 0).all()

    phi = (n_kw + beta) / (n_k[:, None] + V * beta)
    lengths = n_dk.sum(axis=1)
    theta = (n_dk + alpha) / (lengths[:, None] + K * alpha)
    return TopicModel(K, phi, theta, float(alpha), float(beta), iterations, seed, list(corpus.vocabulary))


def top_words(model: TopicModel, topic: int, n: int = 10) -> list[str]:
    return [model.vocabulary[w] for w in model.top_word_ids(topic, n)]
