from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..ingest import AccountProfile

UNKNOWN = "unknown"


@dataclass
class TemporalReport:
    created: dict  # year -> count
    last_tweet: dict  # year (or "unknown") -> count
    window: tuple[int, int]
    era_fraction: dict  # k -> fraction of top-k created inside the window

    def to_dict(self) -> dict:
        return {
            "created_per_year": {str(k): v for k, v in self.created.items()},
            "stopped_tweeting_per_year": {str(k): v for k, v in self.last_tweet.items()},
            "era_window": list(self.window),
            "era_fraction_top_k": {str(k): v for k, v in self.era_fraction.items()},
        }


def creation_histogram(profiles) -> dict[int, int]:
    return dict(sorted(Counter(p.created_at.year for p in profiles).items()))


def last_tweet_histogram(profiles) -> dict:
    counts = Counter(p.last_tweet_at.year if p.last_tweet_at else UNKNOWN for p in profiles)
    years = sorted(k for k in counts if k != UNKNOWN)
    out = {y: counts[y] for y in years}
    if UNKNOWN in counts:
        out[UNKNOWN] = counts[UNKNOWN]
    return out


def era_fraction(profiles: dict[str, AccountProfile], ranked: list[str], k: int, window=(2011, 2013)) -> float:
    """Share of the top-k ranked accounts created within ``window`` (inclusive years)."""
    top = [a for a in ranked[:k] if a in profiles]
    if not top:
        return 0.0
    lo, hi = window
    inside = sum(lo <= profiles[a].created_at.year <= hi for a in top)
    return inside / len(top)


def temporal_report(profiles, ranked: list[str], top_k=(50, 500), window=(2011, 2013)) -> TemporalReport:
    """Histograms over ``profiles`` and era fractions over the ranked accounts.

    ``ranked`` lists account ids best first; ids without a profile are skipped.
    """
    profiles = list(profiles)
    by_id = {p.account_id: p for p in profiles}
    return TemporalReport(
        created=creation_histogram(profiles),
        last_tweet=last_tweet_histogram(profiles),
        window=tuple(window),
        era_fraction={k: era_fraction(by_id, ranked, k, window) for k in top_k},
    )
