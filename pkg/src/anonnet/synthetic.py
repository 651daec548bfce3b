"""Synthetic accounts, planted-topic corpora and the bundled end-to-end fixture.

Everything here is driven by an explicit seed so fixtures are reproducible.
Run ``python -m anonnet.synthetic OUT_DIR`` to regenerate the fixture.
"""

from __future__ import annotations

import json
import sys
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .ingest import AccountProfile, FollowEdge, TweetRecord, write_edges, write_snapshots, write_tweets
from .lexicon import DEFAULT_KEYWORDS

_SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi", "pe", "shu", "dor", "fen", "gal", "hir", "jus", "bex")
_PLAIN_FIRST = ("bob", "alice", "maria", "chen", "sam", "lena", "omar", "kate", "ivan", "noah", "ella", "raj")
_PLAIN_WORDS = (
    "coffee", "music", "dog", "travel", "football", "photos", "mum", "gardening", "books", "cooking",
    "teacher", "runner", "gamer", "nurse", "engineer", "student", "films", "design", "yoga", "cats",
)
_ANON_DESCRIPTIONS = (
    "We are Anonymous. We are Legion. We do not forgive. We do not forget. Expect us.",
    "anon hacktivist #OpIsrael fighting for freedom",
    "Legion news and leaks. expect us",
    "an0nymous collective member. cyber justice for all",
    "Anonymous ops | infosec | we do not forget",
)


def pseudo_words(n: int, rng: np.random.Generator, used: set | None = None) -> list[str]:
    """Distinct made-up lowercase words of three syllables."""
    used = set() if used is None else used
    out = []
    while len(out) < n:
        w = "".join(rng.choice(_SYLLABLES, size=3))
        if w not in used:
            used.add(w)
            out.append(w)
    return out


def _date_between(rng, start: date, end: date) -> date:
    return start + timedelta(days=int(rng.integers(0, (end - start).days + 1)))


def _leetify(word: str, rng) -> str:
    table = {"o": "0", "e": "3", "i": "1", "s": "5"}
    return "".join(table[c] if c in table and rng.random() < 0.5 else c for c in word)


def synthetic_profile(rng: np.random.Generator, positive: bool, account_id: str) -> AccountProfile:
    """One synthetic account; positives carry the collective's markers."""
    created = _date_between(rng, date(2009, 1, 1), date(2019, 6, 30))
    last = _date_between(rng, created, date(2019, 12, 1)) if rng.random() < 0.9 else None
    if positive:
        kw = str(rng.choice(DEFAULT_KEYWORDS))
        tail = str(rng.choice(("news", "ops", "global", "intel", "press", "watch")))
        username = f"{kw}_{tail}{int(rng.integers(0, 99))}"
        screen = f"{kw.capitalize()}{tail.capitalize()}" if rng.random() < 0.6 else _leetify("anonymous " + tail, rng)
        description = str(rng.choice(_ANON_DESCRIPTIONS))
        fawkes = bool(rng.random() < 0.8)
        businessman = bool(not fawkes or rng.random() < 0.2)
        followers = int(rng.integers(50, 20000))
        friends = int(rng.integers(50, 5000))
    else:
        first = str(rng.choice(_PLAIN_FIRST))
        username = f"{first}{int(rng.integers(1, 9999))}"
        screen = f"{first.capitalize()} {str(rng.choice(_PLAIN_WORDS)).capitalize()}"
        words = rng.choice(_PLAIN_WORDS, size=int(rng.integers(0, 6)), replace=False)
        description = " ".join(str(w) for w in words)
        if rng.random() < 0.3:
            description += " :) #life"
        fawkes = businessman = False
        followers = int(rng.integers(0, 3000))
        friends = int(rng.integers(0, 3000))
    return AccountProfile(
        account_id=account_id,
        username=username,
        screen_name=screen,
        description=description,
        tweet_count=int(rng.integers(0, 50000)),
        follower_count=followers,
        friend_count=friends,
        favourites_count=int(rng.integers(0, 20000)),
        listed_count=int(rng.integers(0, 200)),
        location_provided=bool(rng.random() < 0.5),
        is_protected=False,
        url_provided=bool(rng.random() < 0.4),
        has_fawkes_image=fawkes,
        has_businessman_image=businessman,
        created_at=created,
        last_tweet_at=last,
    )


def synthetic_accounts(n_positive: int, n_negative: int, seed: int = 0, prefix: str = "u"):
    """Shuffled profiles and their 0/1 labels."""
    rng = np.random.default_rng(seed)
    labels = [1] * n_positive + [0] * n_negative
    order = rng.permutation(len(labels))
    labels = [labels[i] for i in order]
    profiles = [synthetic_profile(rng, bool(lab), f"{prefix}{i:05d}") for i, lab in enumerate(labels)]
    return profiles, labels


def planted_corpus(
    n_docs: int = 500,
    n_topics: int = 5,
    words_per_topic: int = 30,
    shared_words: int = 5,
    doc_length=(12, 24),
    shared_rate: float = 0.05,
    doc_alpha: float = 0.05,
    seed: int = 0,
):
    """Documents drawn from near-disjoint planted topics.

    Each topic has its own Zipf-weighted word block; a small shared block
    appears in every topic at rate ``shared_rate``.  Returns
    ``(docs, topic_words)`` where ``topic_words[k]`` lists topic k's words by
    decreasing planted probability.
    """
    rng = np.random.default_rng(seed)
    used: set = set()
    blocks = [pseudo_words(words_per_topic, rng, used) for _ in range(n_topics)]
    shared = pseudo_words(shared_words, rng, used)
    zipf = 1.0 / np.arange(1, words_per_topic + 1)
    zipf /= zipf.sum()
    docs = []
    for _ in range(n_docs):
        mix = rng.dirichlet(np.full(n_topics, doc_alpha))
        length = int(rng.integers(doc_length[0], doc_length[1] + 1))
        doc = []
        for _ in range(length):
            if shared_words and rng.random() < shared_rate:
                doc.append(str(rng.choice(shared)))
                continue
            k = int(rng.choice(n_topics, p=mix))
            doc.append(blocks[k][int(rng.choice(words_per_topic, p=zipf))])
        docs.append(doc)
    return docs, blocks


# ------------------------------------------------------------ e2e fixture

FIXTURE_SEED = 20191201
FIXTURE_KEY = "fixture-secret-key"


def _e2e_ids():
    hub = "s_hub"
    seed2 = "s_second"
    stage1 = [f"a1_{i:02d}" for i in range(10)]
    stage2 = [f"a2_{i:02d}" for i in range(8)]
    plain = [f"p_{i:02d}" for i in range(14)]
    decoys = [f"d_{i:02d}" for i in range(40)]  # keyword-named but not collective members
    training = [f"t_{i:03d}" for i in range(40)]
    return hub, seed2, stage1, stage2, plain, decoys, training


def build_e2e_fixture(rng_seed: int = FIXTURE_SEED):
    """Profiles, edges and tweets of the bundled end-to-end fixture.

    Two seeds; ten accounts reachable from the seeds (stage 1) and eight
    reachable only through stage-1 accounts (stage 2).  ``s_hub`` and every
    stage-1 account follow each other, and every stage-2 account follows
    one stage-1 account, so ``s_hub`` dominates all four centrality measures.
    """
    rng = np.random.default_rng(rng_seed)
    hub, seed2, stage1, stage2, plain, decoys, training = _e2e_ids()
    profiles = []
    for acct in [hub, seed2, *stage1, *stage2]:
        profiles.append(synthetic_profile(rng, True, acct))
    for acct in plain:
        profiles.append(synthetic_profile(rng, False, acct))
    for acct in decoys:
        p = synthetic_profile(rng, False, acct)
        # keyword in the name only: a candidate that the label rule rejects
        profiles.append(AccountProfile(**{**p.__dict__, "username": "canonical_" + p.username}))
    for acct in training:
        profiles.append(synthetic_profile(rng, True, acct))
    # Era structure for the temporal report: the hub and stage-1 accounts are
    # from 2011-2013, later joiners are not.
    fixed = []
    for p in profiles:
        if p.account_id == hub or p.account_id in stage1:
            created = date(2011 + int(rng.integers(0, 3)), int(rng.integers(1, 13)), 1)
        elif p.account_id == seed2 or p.account_id in stage2:
            created = date(2015 + int(rng.integers(0, 4)), int(rng.integers(1, 13)), 1)
        else:
            created = p.created_at
        last = p.last_tweet_at if p.last_tweet_at is None or p.last_tweet_at >= created else date(2019, 11, 1)
        fixed.append(AccountProfile(**{**p.__dict__, "created_at": created, "last_tweet_at": last}))
    profiles = fixed

    edges = set()
    for a in [seed2, *stage1]:
        edges.add((a, hub))
        edges.add((hub, a))
    for i, a in enumerate(stage1):
        edges.add((a, seed2))
        edges.add((a, stage1[(i + 1) % len(stage1)]))
    for i, b in enumerate(stage2):
        edges.add((b, stage1[i % len(stage1)]))
        if i % 2 == 0:
            edges.add((stage1[i % len(stage1)], b))
    # plain accounts and decoys follow members; the model rejects them
    members = [hub, seed2, *stage1, *stage2]
    for i, p in enumerate(plain + decoys[:10]):
        edges.add((p, members[i % len(members)]))
    # edges to accounts with no snapshot (suspended/deleted)
    edges.add(("gone_01", hub))
    edges.add((stage1[0], "gone_02"))
    edge_list = [FollowEdge(a, b) for a, b in sorted(edges)]

    tweets = []
    start = datetime(2019, 12, 29, tzinfo=timezone.utc)
    for j, acct in enumerate(members):
        docs, _ = planted_corpus(n_docs=120, n_topics=3, words_per_topic=15, shared_words=3, seed=rng_seed + j)
        for i, doc in enumerate(docs):
            text = " ".join(doc)
            if i % 7 == 0:
                text = "RT @someone " + text + " https://t.co/xyz"
            tweets.append(
                TweetRecord(acct, f"{acct}-{i:05d}", start - timedelta(hours=7 * i + j), text, text.startswith("RT"))
            )
    return profiles, edge_list, tweets


FIXTURE_CONFIG = {
    "seed": 7,
    "workers": 1,
    "output_dir": "out",
    "pseudonymizer_key": FIXTURE_KEY,
    "paths": {"snapshots": "snapshots.jsonl", "edges": "edges.tsv", "tweets": "tweets.jsonl"},
    "classifier": {"n_trees": 25, "folds": 5},
    "expand": {"seeds": ["s_hub", "s_second"], "stages": 2},
    "rank": {"top_k": 10},
    "temporal": {"window": [2011, 2013], "top_k": [5, 10]},
    "subgraph": {"k": 8},
    "topics": {
        "accounts": 3,
        "tweet_limit": 100,
        "grid": [2, 3, 8],
        "seeds_per_k": 2,
        "iterations": 150,
    },
}


def write_e2e_fixture(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profiles, edges, tweets = build_e2e_fixture()
    write_snapshots(profiles, out / "snapshots.jsonl")
    write_edges(edges, out / "edges.tsv")
    write_tweets(tweets, out / "tweets.jsonl")
    (out / "config.json").write_text(json.dumps(FIXTURE_CONFIG, indent=2) + "\n", encoding="utf-8")
    return out


if __name__ == "__main__":
    print(write_e2e_fixture(sys.argv[1] if len(sys.argv) > 1 else "fixture"))
