"""Classifier-gated snowball expansion over an account source."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..classifier import predict
from ..features import SentimentLexicon, extract_features
from ..ingest import AccountSource
from ..lexicon import DEFAULT_TABLE, KeywordTable

logger = logging.getLogger(__name__)


class SnowballError(RuntimeError):
    def __init__(self, message: str, partial: "SnowballRun | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass
class SnowballRun:
    seeds: list[str]
    stages: int
    frontiers: list[list[str]] = field(default_factory=list)  # frontiers[0] = seeds
    accepted: dict[str, int] = field(default_factory=dict)  # account -> stage
    scores: dict[str, float] = field(default_factory=dict)
    rejected: list[int] = field(default_factory=list)
    unavailable: list[int] = field(default_factory=list)
    completed_stages: int = 0

    def accepted_in(self, stage: int) -> list[str]:
        return sorted(a for a, s in self.accepted.items() if s == stage)

    def network(self) -> set[str]:
        """Seeds plus every accepted account."""
        return set(self.seeds) | set(self.accepted)


def _neighbours(source: AccountSource, account: str) -> list[str]:
    return source.get_followers(account) + source.get_friends(account)


def snowball_expand(
    seeds,
    source: AccountSource,
    model,
    stages: int = 2,
    table: KeywordTable = DEFAULT_TABLE,
    lexicon: SentimentLexicon | None = None,
) -> SnowballRun:
    """Classify the followers and friends of the previous stage's acceptances.

    Stage 1 expands the seeds; stage k expands the accounts accepted at
    stage k-1.  Each account is classified at most once.  Accounts the
    source cannot resolve are counted as unavailable.
    """
    seeds = list(dict.fromkeys(seeds))
    for s in seeds:
        if source.get_profile(s) is None:
            raise SnowballError(f"unresolvable seed {s!r}")
    run = SnowballRun(seeds=seeds, stages=stages, frontiers=[list(seeds)])
    seen = set(seeds)
    expand_from = list(seeds)
    for stage in range(1, stages + 1):
        try:
            frontier = []
            for account in expand_from:
                for nb in _neighbours(source, account):
                    if nb not in seen:
                        seen.add(nb)
                        frontier.append(nb)
            frontier.sort()
            rejected = unavailable = 0
            accepted_now = []
            for account in frontier:
                profile = source.get_profile(account)
                if profile is None:
                    unavailable += 1
                    continue
                pred = predict(model, extract_features(profile, table, lexicon))
                run.scores[account] = pred.score
                if pred.label == 1:
                    accepted_now.append(account)
                else:
                    rejected += 1
        except SnowballError:
            raise
        except Exception as exc:
            raise SnowballError(f"stage {stage} failed: {exc}", run) from exc
        run.frontiers.append(frontier)
        for account in accepted_now:
            run.accepted[account] = stage
        run.rejected.append(rejected)
        run.unavailable.append(unavailable)
        run.completed_stages = stage
        logger.info(
            "stage %d: %d examined, %d accepted, %d rejected, %d unavailable",
            stage, len(frontier), len(accepted_now), rejected, unavailable,
        )
        expand_from = accepted_now
    return run
