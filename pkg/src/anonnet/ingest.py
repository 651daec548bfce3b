"""Loading and pseudonymizing account snapshots, follow edges and tweet archives.

File formats
------------
Snapshots and tweets are JSON Lines: one JSON object per line, blank lines
ignored.  Snapshot objects carry the fields of :class:`AccountProfile`
(dates as ``YYYY-MM-DD``; ``last_tweet_at`` may be ``null`` or absent).
Tweet objects carry ``account_id``, ``tweet_id``, ``created_at`` (ISO-8601
timestamp), ``text`` and ``is_retweet``.

Edge files are two-column delimited text, ``follower_id`` then
``followee_id``.  The delimiter is a tab or a comma, detected from the
first data row.  A header row ``follower_id<delim>followee_id`` is skipped.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import logging
from dataclasses import asdict, dataclass, fields
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Protocol

logger = logging.getLogger(__name__)

COUNTER_FIELDS = (
    "tweet_count",
    "follower_count",
    "friend_count",
    "favourites_count",
    "listed_count",
)
FLAG_FIELDS = (
    "location_provided",
    "is_protected",
    "url_provided",
    "has_fawkes_image",
    "has_businessman_image",
)
TEXT_FIELDS = ("username", "screen_name", "description")


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


@dataclass(frozen=True)
class AccountProfile:
    account_id: str
    username: str
    screen_name: str
    description: str = ""
    tweet_count: int = 0
    follower_count: int = 0
    friend_count: int = 0
    favourites_count: int = 0
    listed_count: int = 0
    location_provided: bool = False
    is_protected: bool = False
    url_provided: bool = False
    has_fawkes_image: bool = False
    has_businessman_image: bool = False
    created_at: date = date(2010, 1, 1)
    last_tweet_at: date | None = None

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["created_at"] = self.created_at.isoformat()
        rec["last_tweet_at"] = self.last_tweet_at.isoformat() if self.last_tweet_at else None
        return rec


@dataclass(frozen=True, order=True)
class FollowEdge:
    follower_id: str
    followee_id: str


@dataclass(frozen=True)
class TweetRecord:
    account_id: str
    tweet_id: str
    created_at: datetime
    text: str
    is_retweet: bool = False

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["created_at"] = self.created_at.isoformat()
        return rec


@dataclass(frozen=True)
class EdgeLoadResult:
    edges: list[FollowEdge]
    self_loops: int
    duplicates: int


class Pseudonymizer:
    """Keyed-hash aliasing of account ids (HMAC-SHA256, truncated to 48 bits)."""

    prefix = "acct_"

    def __init__(self, secret_key: bytes | str):
        if isinstance(secret_key, str):
            secret_key = secret_key.encode("utf-8")
        if not secret_key:
            raise ValueError("pseudonymizer key must be non-empty")
        self.secret_key = secret_key

    def __call__(self, account_id: str) -> str:
        return pseudonymize(self, account_id)


def pseudonymize(p: Pseudonymizer, account_id: str) -> str:
    if not p.secret_key:
        raise ValueError("pseudonymizer key must be non-empty")
    digest = hmac.new(p.secret_key, account_id.encode("utf-8"), hashlib.sha256).hexdigest()
    return p.prefix + digest[:12]


def _parse_date(value, lineno: int, name: str) -> date:
    if isinstance(value, str):
        try:
            return date.fromisoformat(value[:10])
        except ValueError:
            pass
    raise DataError(f"line {lineno}: field {name}: expected YYYY-MM-DD date, got {value!r}")


def profile_from_record(rec: dict, lineno: int = 0) -> AccountProfile:
    if not isinstance(rec, dict):
        raise DataError(f"line {lineno}: expected a JSON object")
    known = {f.name for f in fields(AccountProfile)}
    unknown = set(rec) - known
    if unknown:
        raise DataError(f"line {lineno}: unknown field(s) {sorted(unknown)}")
    for name in ("account_id", "username", "screen_name", "created_at"):
        if name not in rec:
            raise DataError(f"line {lineno}: field {name}: missing")

    kwargs = {}
    account_id = rec["account_id"]
    if not isinstance(account_id, str) or not account_id:
        raise DataError(f"line {lineno}: field account_id: must be a non-empty string")
    kwargs["account_id"] = account_id
    for name in TEXT_FIELDS:
        value = rec.get(name, "")
        if value is None:
            value = ""
        if not isinstance(value, str):
            raise DataError(f"line {lineno}: field {name}: expected string")
        kwargs[name] = value
    for name in COUNTER_FIELDS:
        value = rec.get(name, 0)
        if isinstance(value, bool) or not isinstance(value, int):
            raise DataError(f"line {lineno}: field {name}: expected integer, got {value!r}")
        if value < 0:
            raise DataError(f"line {lineno}: field {name}: negative counter {value}")
        kwargs[name] = value
    for name in FLAG_FIELDS:
        value = rec.get(name, False)
        if not isinstance(value, bool):
            raise DataError(f"line {lineno}: field {name}: expected boolean, got {value!r}")
        kwargs[name] = value
    kwargs["created_at"] = _parse_date(rec["created_at"], lineno, "created_at")
    last = rec.get("last_tweet_at")
    kwargs["last_tweet_at"] = None if last is None else _parse_date(last, lineno, "last_tweet_at")
    if kwargs["last_tweet_at"] is not None and kwargs["last_tweet_at"] < kwargs["created_at"]:
        raise DataError(f"line {lineno}: field last_tweet_at: precedes created_at")
    return AccountProfile(**kwargs)


def _iter_json_lines(path: Path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: malformed record: {exc.msg}") from None


def load_snapshots(path) -> list[AccountProfile]:
    profiles = []
    seen: dict[str, int] = {}
    for lineno, rec in _iter_json_lines(path):
        profile = profile_from_record(rec, lineno)
        if profile.account_id in seen:
            raise DataError(
                f"line {lineno}: field account_id: duplicate id (first seen on line {seen[profile.account_id]})"
            )
        seen[profile.account_id] = lineno
        profiles.append(profile)
    return profiles


def write_snapshots(profiles: Iterable[AccountProfile], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in profiles:
            fh.write(json.dumps(p.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def load_edges_report(path) -> EdgeLoadResult:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    delimiter = None
    seen = set()
    edges = []
    self_loops = duplicates = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            if delimiter is None:
                if "\t" in line:
                    delimiter = "\t"
                elif "," in line:
                    delimiter = ","
                else:
                    raise DataError(f"line {lineno}: unknown delimiter (expected tab or comma)")
            parts = [c.strip() for c in line.split(delimiter)]
            if len(parts) != 2 or not all(parts):
                raise DataError(f"line {lineno}: malformed row, expected 2 columns")
            if parts == ["follower_id", "followee_id"]:
                continue
            follower, followee = parts
            if follower == followee:
                self_loops += 1
                continue
            edge = FollowEdge(follower, followee)
            if edge in seen:
                duplicates += 1
                continue
            seen.add(edge)
            edges.append(edge)
    if self_loops:
        logger.warning("%s: dropped %d self-loop(s)", path, self_loops)
    return EdgeLoadResult(edges, self_loops, duplicates)


def load_edges(path) -> list[FollowEdge]:
    return load_edges_report(path).edges


def write_edges(edges: Iterable[FollowEdge], path, delimiter: str = "\t") -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"follower_id{delimiter}followee_id\n")
        for e in edges:
            fh.write(f"{e.follower_id}{delimiter}{e.followee_id}\n")


def unresolved_endpoints(edges: Iterable[FollowEdge], profiles: Iterable[AccountProfile]) -> set[str]:
    """Edge endpoints that have no snapshot."""
    known = {p.account_id for p in profiles}
    out = set()
    for e in edges:
        for node in (e.follower_id, e.followee_id):
            if node not in known:
                out.add(node)
    return out


def _parse_timestamp(value, lineno: int) -> datetime:
    if isinstance(value, str):
        try:
            return datetime.fromisoformat(value.replace("Z", "+00:00"))
        except ValueError:
            pass
    raise DataError(f"line {lineno}: field created_at: expected ISO-8601 timestamp, got {value!r}")


def load_tweets(path) -> list[TweetRecord]:
    tweets = []
    seen = set()
    for lineno, rec in _iter_json_lines(path):
        if not isinstance(rec, dict):
            raise DataError(f"line {lineno}: expected a JSON object")
        for name in ("account_id", "tweet_id", "created_at", "text"):
            if name not in rec:
                raise DataError(f"line {lineno}: field {name}: missing")
        if not isinstance(rec["text"], str):
            raise DataError(f"line {lineno}: field text: expected string")
        key = (str(rec["account_id"]), str(rec["tweet_id"]))
        if key in seen:
            raise DataError(f"line {lineno}: field tweet_id: duplicate tweet id for account")
        seen.add(key)
        tweets.append(
            TweetRecord(
                account_id=key[0],
                tweet_id=key[1],
                created_at=_parse_timestamp(rec["created_at"], lineno),
                text=rec["text"],
                is_retweet=bool(rec.get("is_retweet", False)),
            )
        )
    return tweets


def write_tweets(tweets: Iterable[TweetRecord], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for t in tweets:
            fh.write(json.dumps(t.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


class SourceError(RuntimeError):
    """An account source could not answer a request."""


class AccountSource(Protocol):
    def get_profile(self, account_id: str) -> AccountProfile | None: ...

    def get_followers(self, account_id: str) -> list[str]: ...

    def get_friends(self, account_id: str) -> list[str]: ...


class FileAccountSource:
    """Account source backed by loaded snapshot and edge files.

    Accounts that have no snapshot (suspended, deleted, protected at
    collection time) resolve to ``None``.
    """

    def __init__(self, profiles: Iterable[AccountProfile], edges: Iterable[FollowEdge]):
        self._profiles = {p.account_id: p for p in profiles}
        self._followers: dict[str, list[str]] = {}
        self._friends: dict[str, list[str]] = {}
        for e in edges:
            self._followers.setdefault(e.followee_id, []).append(e.follower_id)
            self._friends.setdefault(e.follower_id, []).append(e.followee_id)

    @classmethod
    def from_files(cls, snapshots_path, edges_path) -> "FileAccountSource":
        return cls(load_snapshots(snapshots_path), load_edges(edges_path))

    def get_profile(self, account_id: str) -> AccountProfile | None:
        return self._profiles.get(account_id)

    def get_followers(self, account_id: str) -> list[str]:
        return list(self._followers.get(account_id, ()))

    def get_friends(self, account_id: str) -> list[str]:
        return list(self._friends.get(account_id, ()))
