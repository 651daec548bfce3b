"""Fixed 62-dimension profile feature map.

Only account metadata goes in: username, screen name, description and the
profile counters/flags.  Tweets are never used.

Layout (``FEATURE_SCHEMA`` is authoritative):

* 25 collective-affiliation features: five keyword-group flags for each of
  the three text fields, motto in description, and hacker terms, l33t
  spelling and inner capitalisation for each text field.
* 9 profile features.
* 28 content features: seven character/word counts per text field, emoji
  counts for screen name and description, and mention, hashtag, URL,
  readability and sentiment features of the description.
"""

from __future__ import annotations

import math
import re
import string
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .ingest import AccountProfile
from .lexicon import DEFAULT_TABLE, KeywordTable, contains_any

SCHEMA_VERSION = 1
N_FEATURES = 62

TEXT_FIELDS = ("username", "screen_name", "description")
KEYWORD_GROUPS = ("anonymous", "anon", "anony", "legion", "ops")
CONTENT_COUNTS = ("characters", "words", "uppercase", "lowercase", "alphabetic", "numeric", "punctuation")

# Inclusive code point ranges counted as emoji.
EMOJI_RANGES = (
    (0x1F000, 0x1F02F),  # mahjong tiles
    (0x1F0A0, 0x1F0FF),  # playing cards
    (0x1F100, 0x1F1FF),  # enclosed alphanumerics, regional indicators
    (0x1F200, 0x1F2FF),  # enclosed ideographic supplement
    (0x1F300, 0x1F5FF),  # misc symbols and pictographs
    (0x1F600, 0x1F64F),  # emoticons
    (0x1F680, 0x1F6FF),  # transport and map
    (0x1F700, 0x1F77F),  # alchemical
    (0x1F780, 0x1F7FF),  # geometric shapes extended
    (0x1F800, 0x1F8FF),  # supplemental arrows-c
    (0x1F900, 0x1F9FF),  # supplemental symbols and pictographs
    (0x1FA00, 0x1FAFF),  # chess, symbols and pictographs extended-a
    (0x2600, 0x26FF),  # misc symbols
    (0x2700, 0x27BF),  # dingbats
)

L33T_DIGITS = {"0": "o", "1": "il", "3": "e", "5": "s", "7": "t", "4": "a"}

MENTION_RE = re.compile(r"(?<!\w)@\w+")
HASHTAG_RE = re.compile(r"(?<!\w)#\w+")
URL_RE = re.compile(r"https?://\S+|www\.\S+", re.IGNORECASE)
OPS_CAMEL_RE = re.compile(r"(?:^|[^A-Za-z])Op[A-Z]")
WORD_RE = re.compile(r"\w+")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    source: str  # username | screen_name | description | profile
    kind: str  # boolean | count | ratio | score


def _build_schema() -> tuple[FeatureSpec, ...]:
    specs = []
    for f in TEXT_FIELDS:
        for group in KEYWORD_GROUPS:
            specs.append(FeatureSpec(f"{f}_uses_{group}", f, "boolean"))
    specs.append(FeatureSpec("description_has_motto", "description", "boolean"))
    for kind in ("hacker_terms", "l33t", "inner_caps"):
        for f in TEXT_FIELDS:
            specs.append(FeatureSpec(f"{f}_{kind}", f, "boolean"))
    specs += [
        FeatureSpec("tweet_count", "profile", "count"),
        FeatureSpec("follower_count", "profile", "count"),
        FeatureSpec("friend_count", "profile", "count"),
        FeatureSpec("follower_friend_ratio", "profile", "ratio"),
        FeatureSpec("favourites_count", "profile", "count"),
        FeatureSpec("listed_count", "profile", "count"),
        FeatureSpec("location_provided", "profile", "boolean"),
        FeatureSpec("is_protected", "profile", "boolean"),
        FeatureSpec("url_provided", "profile", "boolean"),
    ]
    for f in TEXT_FIELDS:
        for c in CONTENT_COUNTS:
            specs.append(FeatureSpec(f"{f}_{c}", f, "count"))
    specs += [
        FeatureSpec("screen_name_emoji", "screen_name", "count"),
        FeatureSpec("description_emoji", "description", "count"),
        FeatureSpec("description_mentions", "description", "count"),
        FeatureSpec("description_hashtags", "description", "count"),
        FeatureSpec("description_has_url", "description", "boolean"),
        FeatureSpec("description_flesch_kincaid", "description", "score"),
        FeatureSpec("description_sentiment", "description", "score"),
    ]
    return tuple(specs)


FEATURE_SCHEMA = _build_schema()
FEATURE_NAMES = tuple(s.name for s in FEATURE_SCHEMA)
assert len(FEATURE_SCHEMA) == N_FEATURES and len(set(FEATURE_NAMES)) == N_FEATURES


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    schema_version: int = SCHEMA_VERSION

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


# ---------------------------------------------------------------- sentiment

NEGATORS = frozenset(
    """not no never none nobody nothing neither nor nowhere cannot cant dont doesnt didnt
    isnt arent wasnt werent wont wouldnt shouldnt couldnt aint hardly without""".split()
)
NEGATION_SCALAR = -0.74
CAPS_INCREMENT = 0.733
COMPOUND_ALPHA = 15.0


@dataclass(frozen=True)
class SentimentLexicon:
    valences: dict

    @classmethod
    def from_file(cls, path) -> "SentimentLexicon":
        return cls(_parse_lexicon(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "SentimentLexicon":
        text = resources.files("anonnet.data").joinpath("sentiment_lexicon.tsv").read_text(encoding="utf-8")
        return cls(_parse_lexicon(text))


def _parse_lexicon(text: str) -> dict[str, float]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"sentiment lexicon line {lineno}: expected 'token valence'")
        value = float(parts[1])
        if not -4.0 <= value <= 4.0:
            raise ValueError(f"sentiment lexicon line {lineno}: valence {value} outside [-4, 4]")
        out[parts[0].casefold()] = value
    return out


def _sentiment_tokens(text: str) -> list[str]:
    toks = (t.strip(string.punctuation) for t in text.split())
    return [t for t in toks if t]


def sentiment_compound(text: str, lexicon: SentimentLexicon) -> float:
    """Lexicon valence sum squashed into (-1, 1).

    A negator among the three preceding tokens scales a valence by -0.74.
    An ALL-CAPS token gains 0.733 magnitude, but only when the text mixes
    capitalised and non-capitalised words.
    """
    tokens = _sentiment_tokens(text)
    if not tokens:
        return 0.0
    alpha_tokens = [t for t in tokens if any(c.isalpha() for c in t)]
    n_caps = sum(t.isupper() for t in alpha_tokens)
    caps_differential = 0 < n_caps < len(alpha_tokens)
    lowered = [t.casefold().replace("'", "") for t in tokens]

    total = 0.0
    for i, tok in enumerate(tokens):
        valence = lexicon.valences.get(lowered[i])
        if valence is None:
            continue
        if caps_differential and tok.isupper():
            valence += CAPS_INCREMENT if valence > 0 else -CAPS_INCREMENT
        if any(prev in NEGATORS for prev in lowered[max(0, i - 3):i]):
            valence *= NEGATION_SCALAR
        total += valence
    if total == 0.0:
        return 0.0
    return total / math.sqrt(total * total + COMPOUND_ALPHA)


# -------------------------------------------------------------- readability

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
_SENTENCE_END_RE = re.compile(r"[.!?]+")


def count_syllables(word: str) -> int:
    """Vowel-group count with a silent trailing 'e'; at least one."""
    w = word.casefold()
    n = len(_VOWEL_GROUP_RE.findall(w))
    if w.endswith("e") and not w.endswith("le") and n > 1:
        n -= 1
    return max(1, n)


def flesch_kincaid(text: str) -> float:
    words = [w for w in WORD_RE.findall(text) if w.strip("_")]
    if not words:
        return 0.0
    sentences = max(1, len(_SENTENCE_END_RE.findall(text)))
    syllables = sum(count_syllables(w) for w in words)
    return 0.39 * (len(words) / sentences) + 11.8 * (syllables / len(words)) - 15.59


# ------------------------------------------------------------ small detectors


def detect_l33t(text: str) -> bool:
    for tok in WORD_RE.findall(text):
        has_alpha = any(c.isalpha() for c in tok)
        if has_alpha and any(c in L33T_DIGITS for c in tok):
            return True
    return False


def detect_inner_caps(text: str) -> bool:
    for tok in WORD_RE.findall(text):
        if any(c.isupper() for c in tok[1:]) and any(c.islower() for c in tok):
            return True
    return False


def contains_motto(description: str, table: KeywordTable = DEFAULT_TABLE) -> bool:
    return contains_any(description, table.motto_patterns)


def contains_hacker_term(text: str, table: KeywordTable = DEFAULT_TABLE) -> bool:
    return contains_any(text, table.hacker_terms)


def _de_l33t(s: str) -> str:
    return s.translate(str.maketrans({"0": "o", "1": "i", "3": "e", "4": "a", "5": "s", "7": "t"}))


def keyword_groups(table: KeywordTable) -> dict[str, tuple[str, ...]]:
    """Partition the table's keywords into the feature groups by de-l33ted form."""
    groups: dict[str, list[str]] = {"anonymous": [], "anon": [], "anony": [], "legion": []}
    for kw in table.keywords:
        canon = _de_l33t(kw)
        if canon.startswith("anonymou"):
            groups["anonymous"].append(kw)
        elif canon == "anony":
            groups["anony"].append(kw)
        elif canon == "anon":
            groups["anon"].append(kw)
        elif "gion" in canon or canon.startswith("leg"):
            groups["legion"].append(kw)
    return {k: tuple(v) for k, v in groups.items()}


def uses_ops(text: str) -> bool:
    return "ops" in text.casefold() or OPS_CAMEL_RE.search(text) is not None


# ------------------------------------------------------------- count helpers


def is_punctuation(ch: str) -> bool:
    return ch in string.punctuation or unicodedata.category(ch).startswith("P")


def is_emoji(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in EMOJI_RANGES)


def character_counts(text: str) -> dict[str, int]:
    return {
        "characters": len(text),
        "words": len(text.split()),
        # letter-numbers such as U+2177 are cased but not alphabetic
        "uppercase": sum(c.isalpha() and c.isupper() for c in text),
        "lowercase": sum(c.isalpha() and c.islower() for c in text),
        "alphabetic": sum(c.isalpha() for c in text),
        "numeric": sum(c.isdigit() for c in text),
        "punctuation": sum(is_punctuation(c) for c in text),
    }


def count_emoji(text: str) -> int:
    return sum(is_emoji(c) for c in text)


def follower_friend_ratio(followers: int, friends: int) -> float:
    return followers / max(friends, 1)


# ---------------------------------------------------------------- extraction

_DEFAULT_LEXICON = None


def _default_lexicon() -> SentimentLexicon:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = SentimentLexicon.default()
    return _DEFAULT_LEXICON


def feature_dict(
    profile: AccountProfile,
    table: KeywordTable = DEFAULT_TABLE,
    lexicon: SentimentLexicon | None = None,
) -> dict[str, float]:
    lexicon = lexicon or _default_lexicon()
    groups = keyword_groups(table)
    texts = {f: getattr(profile, f) for f in TEXT_FIELDS}
    out: dict[str, float] = {}
    for f, text in texts.items():
        for group in KEYWORD_GROUPS:
            hit = uses_ops(text) if group == "ops" else contains_any(text, groups[group])
            out[f"{f}_uses_{group}"] = float(hit)
    out["description_has_motto"] = float(contains_motto(profile.description, table))
    for f, text in texts.items():
        out[f"{f}_hacker_terms"] = float(contains_hacker_term(text, table))
        out[f"{f}_l33t"] = float(detect_l33t(text))
        out[f"{f}_inner_caps"] = float(detect_inner_caps(text))

    out["tweet_count"] = float(profile.tweet_count)
    out["follower_count"] = float(profile.follower_count)
    out["friend_count"] = float(profile.friend_count)
    out["follower_friend_ratio"] = follower_friend_ratio(profile.follower_count, profile.friend_count)
    out["favourites_count"] = float(profile.favourites_count)
    out["listed_count"] = float(profile.listed_count)
    out["location_provided"] = float(profile.location_provided)
    out["is_protected"] = float(profile.is_protected)
    out["url_provided"] = float(profile.url_provided)

    for f, text in texts.items():
        for name, value in character_counts(text).items():
            out[f"{f}_{name}"] = float(value)
    desc = profile.description
    out["screen_name_emoji"] = float(count_emoji(profile.screen_name))
    out["description_emoji"] = float(count_emoji(desc))
    out["description_mentions"] = float(len(MENTION_RE.findall(desc)))
    out["description_hashtags"] = float(len(HASHTAG_RE.findall(desc)))
    out["description_has_url"] = float(URL_RE.search(desc) is not None)
    out["description_flesch_kincaid"] = flesch_kincaid(desc)
    out["description_sentiment"] = sentiment_compound(desc, lexicon)
    return out


def extract_features(
    profile: AccountProfile,
    table: KeywordTable = DEFAULT_TABLE,
    lexicon: SentimentLexicon | None = None,
    schema=FEATURE_SCHEMA,
) -> FeatureVector:
    values = feature_dict(profile, table, lexicon)
    return FeatureVector(np.array([values[s.name] for s in schema], dtype=np.float64))


def feature_matrix(profiles, table: KeywordTable = DEFAULT_TABLE, lexicon: SentimentLexicon | None = None) -> np.ndarray:
    if not profiles:
        return np.zeros((0, N_FEATURES))
    return np.vstack([extract_features(p, table, lexicon).values for p in profiles])
