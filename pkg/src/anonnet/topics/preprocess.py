"""Tweet cleaning, tokenization and bigram merging."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path

from ..ingest import TweetRecord

URL_RE = re.compile(r"https?://\S+|www\.\S+")
MENTION_RE = re.compile(r"(?<!\w)@\w+")
TOKEN_RE = re.compile(r"\w+(?:'\w+)?")
RETWEET_MARKERS = frozenset({"rt", "via"})


def _read_lines(text: str) -> list[str]:
    return [ln.split("#", 1)[0].strip() for ln in text.splitlines() if ln.split("#", 1)[0].strip()]


def _data(name: str) -> str:
    return resources.files("anonnet.data").joinpath(name).read_text(encoding="utf-8")


def load_stopwords(path=None) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8") if path else _data("stopwords.txt")
    return frozenset(w.lower() for w in _read_lines(text))


def load_contractions(path=None) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8") if path else _data("contractions.tsv")
    out = {}
    for line in _read_lines(text):
        key, expansion = line.split("\t", 1) if "\t" in line else line.split(None, 1)
        out[key.strip().lower()] = expansion.strip().lower()
    return out


@dataclass(frozen=True)
class BigramParams:
    min_count: int = 10
    min_pmi: float = 3.0


@dataclass
class TokenizedCorpus:
    documents: list[list[int]]
    vocabulary: list[str]
    tweet_ids: list[str] = field(default_factory=list)
    dropped_empty: int = 0

    @property
    def token_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.vocabulary)}

    @property
    def n_tokens(self) -> int:
        return sum(len(d) for d in self.documents)

    def texts(self) -> list[list[str]]:
        return [[self.vocabulary[i] for i in d] for d in self.documents]

    def render(self) -> list[str]:
        """Documents as space-joined text."""
        return [" ".join(doc) for doc in self.texts()]

    @classmethod
    def from_texts(cls, docs: list[list[str]], tweet_ids=None, dropped_empty: int = 0) -> "TokenizedCorpus":
        vocab = sorted({w for d in docs for w in d})
        index = {w: i for i, w in enumerate(vocab)}
        return cls([[index[w] for w in d] for d in docs], vocab, list(tweet_ids or []), dropped_empty)


def clean_tokens(text: str, stopwords, contractions) -> list[str]:
    text = text.lower().replace("’", "'")
    text = URL_RE.sub(" ", text)
    text = MENTION_RE.sub(" ", text)
    out = []
    for tok in TOKEN_RE.findall(text):
        for word in contractions.get(tok, tok).split():
            word = word.replace("'", "")
            if word in RETWEET_MARKERS or word in stopwords or len(word) < 2:
                continue
            out.append(word)
    return out


def _qualifying_pairs(docs, params: BigramParams) -> set[tuple[str, str]]:
    unigrams = Counter(w for d in docs for w in d)
    total = sum(unigrams.values())
    pairs = Counter(
        (a, b) for d in docs for a, b in zip(d, d[1:]) if "_" not in a and "_" not in b and a != b
    )
    good = set()
    for (a, b), n_ab in pairs.items():
        if n_ab < params.min_count:
            continue
        if math.log(n_ab * total / (unigrams[a] * unigrams[b])) > params.min_pmi:
            good.add((a, b))
    return good


def _merge(doc: list[str], good) -> list[str]:
    out = []
    i = 0
    while i < len(doc):
        if i + 1 < len(doc) and (doc[i], doc[i + 1]) in good:
            out.append(doc[i] + "_" + doc[i + 1])
            i += 2
        else:
            out.append(doc[i])
            i += 1
    return out


def merge_bigrams(docs: list[list[str]], params: BigramParams = BigramParams()) -> list[list[str]]:
    """Join frequent, high-PMI adjacent pairs as ``a_b`` until none qualify.

    Only plain (non-merged) tokens pair up, so merging stops at bigrams.
    """
    while True:
        good = _qualifying_pairs(docs, params)
        if not good:
            return docs
        docs = [_merge(d, good) for d in docs]


def preprocess(
    tweets,
    stopwords=None,
    contractions=None,
    bigrams: BigramParams | None = BigramParams(),
) -> TokenizedCorpus:
    """One document per tweet; documents left empty are dropped and counted.

    ``tweets`` may be TweetRecords or plain strings.
    """
    stopwords = load_stopwords() if stopwords is None else frozenset(stopwords)
    contractions = load_contractions() if contractions is None else contractions
    docs, ids = [], []
    dropped = 0
    for i, t in enumerate(tweets):
        text, tid = (t.text, t.tweet_id) if isinstance(t, TweetRecord) else (t, str(i))
        toks = clean_tokens(text, stopwords, contractions)
        if toks:
            docs.append(toks)
            ids.append(tid)
        else:
            dropped += 1
    if bigrams is not None:
        docs = merge_bigrams(docs, bigrams)
    return TokenizedCorpus.from_texts(docs, ids, dropped)


@dataclass(frozen=True)
class RecentSelection:
    tweets: list[TweetRecord]
    span: tuple[datetime, datetime] | None  # (oldest, newest) selected
    years: dict[int, int]  # tweets per calendar year among those selected


def select_recent(tweets, limit: int = 1500) -> RecentSelection:
    """The ``limit`` newest tweets, newest first; ties broken by tweet id."""
    ordered = sorted(tweets, key=lambda t: (t.created_at, t.tweet_id), reverse=True)[:limit]
    span = (ordered[-1].created_at, ordered[0].created_at) if ordered else None
    return RecentSelection(ordered, span, dict(sorted(Counter(t.created_at.year for t in ordered).items())))
