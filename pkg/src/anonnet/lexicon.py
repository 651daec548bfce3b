"""Keyword table and the labelling rules built on it.

Matching is permissive on purpose: a keyword matches anywhere inside the
case-folded text, so "Canonical" matches "anon".  False positives are
expected to be removed by the downstream classifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .ingest import AccountProfile

POSITIVE = "positive"
NEGATIVE = "negative"
CANDIDATE = "candidate"
EXCLUDED = "excluded"


def read_term_file(path) -> tuple[str, ...]:
    """Read a one-entry-per-line list; '#' starts a comment."""
    text = Path(path).read_text(encoding="utf-8")
    return _parse_terms(text)


def _parse_terms(text: str) -> tuple[str, ...]:
    out = []
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip().casefold()
        if entry and entry not in out:
            out.append(entry)
    return tuple(out)


def _packaged(name: str) -> tuple[str, ...]:
    return _parse_terms(resources.files("anonnet.data").joinpath(name).read_text(encoding="utf-8"))


DEFAULT_KEYWORDS = _packaged("keywords.txt")
DEFAULT_HACKER_TERMS = _packaged("hacker_terms.txt")
DEFAULT_MOTTO_PATTERNS = _packaged("motto.txt")


@dataclass(frozen=True)
class KeywordTable:
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS
    hacker_terms: tuple[str, ...] = DEFAULT_HACKER_TERMS
    motto_patterns: tuple[str, ...] = DEFAULT_MOTTO_PATTERNS

    def __post_init__(self):
        for name in ("keywords", "hacker_terms", "motto_patterns"):
            entries = tuple(getattr(self, name))
            object.__setattr__(self, name, entries)
            if len(set(entries)) != len(entries):
                raise ValueError(f"{name}: entries must be unique")
            for e in entries:
                if not e or e != e.casefold():
                    raise ValueError(f"{name}: entry {e!r} must be non-empty and lowercase")

    @classmethod
    def from_files(cls, keywords=None, hacker_terms=None, motto=None) -> "KeywordTable":
        return cls(
            keywords=read_term_file(keywords) if keywords else DEFAULT_KEYWORDS,
            hacker_terms=read_term_file(hacker_terms) if hacker_terms else DEFAULT_HACKER_TERMS,
            motto_patterns=read_term_file(motto) if motto else DEFAULT_MOTTO_PATTERNS,
        )


DEFAULT_TABLE = KeywordTable()


@dataclass(frozen=True)
class LabelDecision:
    account_id: str
    label: str
    rule_trace: tuple[str, ...] = field(default_factory=tuple)


def contains_any(text: str, terms) -> bool:
    folded = text.casefold()
    return any(t in folded for t in terms)


def contains_anon_keyword(text: str, table: KeywordTable = DEFAULT_TABLE) -> bool:
    return contains_any(text, table.keywords)


def name_filter(profile: AccountProfile, table: KeywordTable = DEFAULT_TABLE) -> bool:
    return contains_anon_keyword(profile.username, table) or contains_anon_keyword(
        profile.screen_name, table
    )


def filter_decision(profile: AccountProfile, table: KeywordTable = DEFAULT_TABLE) -> LabelDecision:
    """Candidate/excluded decision from the name filter, with trace."""
    in_username = contains_anon_keyword(profile.username, table)
    in_screen_name = contains_anon_keyword(profile.screen_name, table)
    trace = (f"keyword_in_username={in_username}", f"keyword_in_screen_name={in_screen_name}")
    label = CANDIDATE if (in_username or in_screen_name) else EXCLUDED
    return LabelDecision(profile.account_id, label, trace)


def positive_label_rule(profile: AccountProfile, table: KeywordTable = DEFAULT_TABLE) -> LabelDecision:
    name_ok = name_filter(profile, table)
    description_ok = contains_anon_keyword(profile.description, table)
    image_ok = profile.has_fawkes_image or profile.has_businessman_image
    trace = (
        f"keyword_in_name={name_ok}",
        f"keyword_in_description={description_ok}",
        f"anon_image={image_ok}",
    )
    label = POSITIVE if (name_ok and description_ok and image_ok) else NEGATIVE
    return LabelDecision(profile.account_id, label, trace)
