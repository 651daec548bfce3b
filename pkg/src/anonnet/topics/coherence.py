"""UCI coherence: mean pairwise PMI of each topic's top words.

Word and pair probabilities are window frequencies over the reference
corpus.  A document of ``window`` tokens or fewer is a single window;
longer documents contribute every contiguous window of that length.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .lda import TopicModel
from .preprocess import TokenizedCorpus


def window_sets(corpus: TokenizedCorpus, window: int = 10) -> list[frozenset[int]]:
    out = []
    for doc in corpus.documents:
        if len(doc) <= window:
            out.append(frozenset(doc))
        else:
            out += [frozenset(doc[i:i + window]) for i in range(len(doc) - window + 1)]
    return out


def pmi_matrix(word_ids, windows, epsilon: float = 1e-12) -> np.ndarray:
    """Pairwise log((P(i,j) + eps) / (P(i) P(j))) for the given word ids."""
    ids = list(word_ids)
    pos = {w: k for k, w in enumerate(ids)}
    occ = np.zeros((len(windows), len(ids)), dtype=np.float64)
    for r, win in enumerate(windows):
        for w in win:
            k = pos.get(w)
            if k is not None:
                occ[r, k] = 1.0
    n = len(windows)
    p = occ.sum(axis=0) / n
    joint = (occ.T @ occ) / n
    with np.errstate(divide="ignore"):
        return np.log((joint + epsilon) / np.outer(p, p))


def topic_coherence(word_ids, windows, epsilon: float = 1e-12) -> float:
    ids = list(word_ids)
    if len(ids) < 2:
        return 0.0
    m = pmi_matrix(ids, windows, epsilon)
    pairs = list(combinations(range(len(ids)), 2))
    return float(sum(m[i, j] for i, j in pairs) / len(pairs))


def uci_coherence(
    model: TopicModel,
    corpus: TokenizedCorpus,
    top_n: int = 10,
    window: int = 10,
    epsilon: float = 1e-12,
    per_topic: bool = False,
):
    """Average over topics of the mean pairwise PMI among the top ``top_n`` words."""
    if top_n > len(corpus.vocabulary):
        raise ValueError(f"top_n={top_n} exceeds vocabulary size {len(corpus.vocabulary)}")
    windows = window_sets(corpus, window)
    scores = [topic_coherence(model.top_word_ids(k, top_n), windows, epsilon) for k in range(model.K)]
    mean = float(sum(scores) / len(scores))
    if not math.isfinite(mean):
        raise ArithmeticError("non-finite coherence")
    return (mean, scores) if per_topic else mean
