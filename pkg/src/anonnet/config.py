"""Pipeline configuration: one declarative file, optionally overridden by flags.

Precedence, highest first: command-line flags, config file, built-in
defaults.  Relative paths resolve against the config file's directory.
JSON (``.json``) and YAML (``.yaml``/``.yml``) files are accepted.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "seed": None,
    "workers": 1,
    "output_dir": "out",
    "pseudonymizer_key": None,
    "pseudonymizer_key_file": None,
    "pseudonymizer_key_env": None,
    "paths": {"snapshots": None, "edges": None, "tweets": None},
    "lexicon": {
        "keywords": None,
        "hacker_terms": None,
        "motto": None,
        "sentiment": None,
        "stopwords": None,
        "contractions": None,
    },
    "classifier": {
        "n_trees": 100,
        "features_per_split": 7,
        "bootstrap": True,
        "max_depth": None,
        "min_samples_split": 2,
        "min_samples_leaf": 1,
        "folds": 5,
    },
    "expand": {"seeds": [], "stages": 2},
    "centrality": {
        "degree_mode": "total",
        "eigen_tol": 1e-8,
        "eigen_max_iter": 1000,
        "eigen_transpose": False,
        "damping": 0.85,
        "pagerank_tol": 1e-9,
        "pagerank_max_iter": 200,
    },
    "rank": {"top_k": 10},
    "temporal": {"window": [2011, 2013], "top_k": [50, 500]},
    "subgraph": {"k": 100, "measure": "fused"},
    "topics": {
        "accounts": 6,
        "tweet_limit": 1500,
        "grid": [2, 8, 14, 20, 26, 32, 38],
        "seeds_per_k": 3,
        "iterations": 1000,
        "alpha": None,
        "beta": 0.01,
        "top_n": 10,
        "window": 10,
        "bigram_min_count": 10,
        "bigram_min_pmi": 3.0,
        "k_override": {},
    },
}


def _merge(base: dict, override: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where}{key}")
        if isinstance(base[key], dict) and key != "k_override":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where}{key} must be a mapping")
            out[key] = _merge(base[key], value, f"{where}{key}.")
        else:
            out[key] = value
    return out


@dataclass
class Config:
    data: dict
    base_dir: Path = field(default_factory=Path.cwd)
    source: Path | None = None

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def workers(self) -> int:
        return int(self.data["workers"])

    def path(self, name: str) -> Path | None:
        value = self.data["paths"].get(name)
        return None if value is None else self.resolve(value)

    def lexicon_path(self, name: str) -> Path | None:
        value = self.data["lexicon"].get(name)
        return None if value is None else self.resolve(value)

    def resolve(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def output_dir(self) -> Path:
        return self.resolve(self.data["output_dir"])

    def secret_key(self) -> bytes:
        d = self.data
        if d["pseudonymizer_key"]:
            return str(d["pseudonymizer_key"]).encode("utf-8")
        if d["pseudonymizer_key_file"]:
            key = self.resolve(d["pseudonymizer_key_file"]).read_bytes().strip()
            if key:
                return key
        if d["pseudonymizer_key_env"]:
            key = os.environ.get(d["pseudonymizer_key_env"], "")
            if key:
                return key.encode("utf-8")
        raise ConfigError("no pseudonymizer key configured")

    def digest(self) -> str:
        """SHA-256 of the effective configuration (paths as given)."""
        text = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def validate(self, required_paths=()) -> None:
        if self.data["seed"] is None:
            raise ConfigError("seed must be set explicitly (config 'seed' or --seed)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        for name, value in self.data["paths"].items():
            if value is not None and not self.resolve(value).exists():
                raise ConfigError(f"paths.{name}: file not found: {self.resolve(value)}")
        for name in required_paths:
            if self.data["paths"].get(name) is None:
                raise ConfigError(f"paths.{name} is required for this command")
        for name, value in self.data["lexicon"].items():
            if value is not None and not self.resolve(value).exists():
                raise ConfigError(f"lexicon.{name}: file not found: {self.resolve(value)}")
        out = self.output_dir
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output_dir not writable: {exc}") from None
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output_dir not writable: {out}")
        self.secret_key()


def load_config(path=None, overrides: dict | None = None) -> Config:
    data: dict = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        try:
            data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        base = path.resolve().parent
    merged = _merge(DEFAULTS, data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    return Config(merged, base, path)
