"""Topic-number sweep driven by UCI coherence, and per-account topic reports."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coherence import uci_coherence
from .lda import TopicModel, lda_fit
from .preprocess import TokenizedCorpus

DEFAULT_GRID = tuple(range(2, 40, 6))  # 2, 8, ..., 38


@dataclass(frozen=True)
class LDAParams:
    iterations: int = 1000
    alpha: float | None = None  # None -> 50 / K
    beta: float = 0.01
    top_n: int = 10
    window: int = 10


@dataclass
class SweepResult:
    grid: tuple[int, ...]
    coherence: dict[int, float]  # mean over seeds
    per_seed: dict[int, list[float]]
    seeds: dict[int, list[int]]
    selected_k: int
    models: dict[int, TopicModel] = field(default_factory=dict, repr=False)

    def curve_rows(self) -> list[dict]:
        return [
            {"K": k, "mean_coherence": self.coherence[k], "per_seed": self.per_seed[k]}
            for k in self.grid
        ]


def sweep_seed(seed: int, K: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed, K, rep]).generate_state(1)[0])


def _fit_and_score(args):
    corpus, K, params, s = args
    model = lda_fit(corpus, K, params.iterations, params.alpha, params.beta, s)
    top_n = min(params.top_n, len(corpus.vocabulary))
    model.coherence = uci_coherence(model, corpus, top_n, params.window)
    return model


def sweep_topic_numbers(
    corpus: TokenizedCorpus,
    grid=DEFAULT_GRID,
    seeds_per_k: int = 3,
    seed: int = 0,
    params: LDAParams = LDAParams(),
    workers: int = 1,
    keep_models: bool = False,
) -> SweepResult:
    """Fit every K in ``grid`` with several seeds; select the best mean coherence.

    Ties go to the smaller K.  Grid points larger than the token count are
    skipped.
    """
    grid = tuple(grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be non-empty and strictly increasing")
    usable = tuple(k for k in grid if k <= corpus.n_tokens)
    if not usable:
        raise ValueError("no grid point fits the corpus")
    jobs = [(corpus, K, params, sweep_seed(seed, K, r)) for K in usable for r in range(seeds_per_k)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            models = list(pool.map(_fit_and_score, jobs))
    else:
        models = [_fit_and_score(j) for j in jobs]

    per_seed: dict[int, list[float]] = {}
    seeds: dict[int, list[int]] = {}
    best_models: dict[int, TopicModel] = {}
    for (_, K, _, s), m in zip(jobs, models):
        per_seed.setdefault(K, []).append(m.coherence)
        seeds.setdefault(K, []).append(s)
        if keep_models and (K not in best_models or m.coherence > best_models[K].coherence):
            best_models[K] = m
    coherence = {K: float(np.mean(v)) for K, v in per_seed.items()}
    selected = max(usable, key=lambda K: (coherence[K], -K))
    return SweepResult(usable, coherence, per_seed, seeds, selected, best_models)


def topic_report(model: TopicModel, n: int = 10) -> list[dict]:
    """One block per topic: top words with probabilities; label left for a human."""
    out = []
    for k in range(model.K):
        ids = model.top_word_ids(k, min(n, len(model.vocabulary)))
        out.append({
            "topic": k,
            "label": "",
            "words": [model.vocabulary[w] for w in ids],
            "probabilities": [float(model.phi[k, w]) for w in ids],
        })
    return out


def topic_report_text(model: TopicModel, n: int = 10) -> str:
    lines = []
    for block in topic_report(model, n):
        lines.append(f"Topic {block['topic'] + 1}  label: ")
        lines += [f"  {w:<24} {p:.4f}" for w, p in zip(block["words"], block["probabilities"])]
        lines.append("")
    return "\n".join(lines)

