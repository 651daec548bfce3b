"""Stage-wise pipeline commands.

Every command reads its inputs from the configured files and from artifacts
persisted in the output directory, writes its own artifacts there, and
records itself in ``manifest.json``.  Emitted artifacts carry pseudonyms,
never raw account ids.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import (
    MODEL_VERSION,
    ForestParams,
    ModelSpec,
    TreeParams,
    cross_validate,
    load_model,
    predict_many,
    save_model,
    train_forest,
)
from .config import Config, ConfigError
from .features import SCHEMA_VERSION, SentimentLexicon, feature_matrix
from .ingest import (
    DataError,
    FileAccountSource,
    Pseudonymizer,
    load_edges_report,
    load_snapshots,
    load_tweets,
    unresolved_endpoints,
)
from .lexicon import CANDIDATE, POSITIVE, KeywordTable, filter_decision, positive_label_rule
from .netgraph import (
    MEASURES,
    CentralityParams,
    CentralityReport,
    FollowGraph,
    compute_centrality,
    read_graph,
    snowball_expand,
    temporal_report,
    top_k_subgraph,
    write_graph,
)
from .topics import BigramParams, LDAParams, lda_fit, preprocess, select_recent, sweep_topic_numbers, uci_coherence
from .topics.preprocess import load_contractions, load_stopwords
from .topics.sweep import sweep_seed, topic_report, topic_report_text

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
EXPANSION = "expansion.jsonl"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def write_jsonl(path, rows) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def read_jsonl(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing artifact {path.name}; run the producing command first")
    with path.open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_tsv(path, header, rows) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


class Context:
    """Loaded config plus lazily loaded inputs shared by the commands."""

    def __init__(self, config: Config):
        self.config = config
        self.out = config.output_dir
        self.pseudo = Pseudonymizer(config.secret_key())
        self._profiles = None
        self._inputs: dict[str, str] = {}
        self.outputs: list[Path] = []
        self.extra: dict = {}

    # inputs -------------------------------------------------------------

    def _track(self, path: Path) -> Path:
        self._inputs[path.name] = sha256_file(path)
        return path

    def require(self, name: str) -> Path:
        p = self.config.path(name)
        if p is None:
            raise ConfigError(f"paths.{name} is required for this command")
        return self._track(p)

    def artifact(self, name: str) -> Path:
        p = self.out / name
        if not p.exists():
            raise DataError(f"missing artifact {name}; run the producing command first")
        return self._track(p)

    @property
    def profiles(self):
        if self._profiles is None:
            self._profiles = load_snapshots(self.require("snapshots"))
        return self._profiles

    def table(self) -> KeywordTable:
        c = self.config
        return KeywordTable.from_files(c.lexicon_path("keywords"), c.lexicon_path("hacker_terms"), c.lexicon_path("motto"))

    def lexicon(self) -> SentimentLexicon:
        p = self.config.lexicon_path("sentiment")
        return SentimentLexicon.from_file(p) if p else SentimentLexicon.default()

    def by_pseudonym(self) -> dict:
        return {self.pseudo(p.account_id): p for p in self.profiles}

    # outputs ------------------------------------------------------------

    def emit(self, name: str) -> Path:
        p = self.out / name
        p.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(p)
        return p

    def record(self, command: str, started: float) -> None:
        path = self.out / MANIFEST
        manifest = json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
        manifest.setdefault("tool", "anonnet")
        manifest["tool_version"] = __version__
        commands = manifest.setdefault("commands", {})
        commands[command] = {
            "command": command,
            "config_hash": self.config.digest(),
            "seed": self.config.seed,
            "workers": self.config.workers,
            "inputs": dict(sorted(self._inputs.items())),
            "outputs": {str(p.relative_to(self.out)): sha256_file(p) for p in sorted(set(self.outputs))},
            "artifact_versions": {"feature_schema": SCHEMA_VERSION, "model_format": MODEL_VERSION},
            "extra": self.extra,
            "wall_time_s": round(time.perf_counter() - started, 3),
            "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        write_json(path, manifest)


# ------------------------------------------------------------------ filter


def cmd_filter(ctx: Context) -> dict:
    table = ctx.table()
    rows = []
    for p in ctx.profiles:
        d = filter_decision(p, table)
        if d.label == CANDIDATE:
            rows.append({"account": ctx.pseudo(p.account_id), "label": d.label, "rule_trace": list(d.rule_trace)})
    write_jsonl(ctx.emit("candidates.jsonl"), rows)
    ctx.extra = {"profiles": len(ctx.profiles), "candidates": len(rows)}
    return ctx.extra


def cmd_label(ctx: Context) -> dict:
    table = ctx.table()
    candidates = {r["account"] for r in read_jsonl(ctx.artifact("candidates.jsonl"))}
    rows = []
    for p in ctx.profiles:
        alias = ctx.pseudo(p.account_id)
        if alias not in candidates:
            continue
        d = positive_label_rule(p, table)
        rows.append({"account": alias, "label": d.label, "rule_trace": list(d.rule_trace)})
    write_jsonl(ctx.emit("labels.jsonl"), rows)
    n_pos = sum(r["label"] == POSITIVE for r in rows)
    ctx.extra = {"labelled": len(rows), "positive": n_pos, "negative": len(rows) - n_pos}
    return ctx.extra


def _training_data(ctx: Context):
    labels = read_jsonl(ctx.artifact("labels.jsonl"))
    by_alias = ctx.by_pseudonym()
    missing = [r["account"] for r in labels if r["account"] not in by_alias]
    if missing:
        raise DataError(f"{len(missing)} labelled account(s) have no snapshot")
    profiles = [by_alias[r["account"]] for r in labels]
    X = feature_matrix(profiles, ctx.table(), ctx.lexicon())
    y = np.array([int(r["label"] == POSITIVE) for r in labels], dtype=np.int64)
    if len(set(y.tolist())) < 2:
        raise DataError("training labels contain a single class")
    return X, y


def _forest_params(config: Config) -> ForestParams:
    c = config["classifier"]
    return ForestParams(
        n_trees=int(c["n_trees"]),
        features_per_split=int(c["features_per_split"]),
        bootstrap=bool(c["bootstrap"]),
        max_depth=c["max_depth"],
        min_samples_split=int(c["min_samples_split"]),
        min_samples_leaf=int(c["min_samples_leaf"]),
    )


def cmd_train(ctx: Context) -> dict:
    X, y = _training_data(ctx)
    model = train_forest((X, y), _forest_params(ctx.config), ctx.config.seed, ctx.config.workers)
    digest = save_model(model, ctx.emit("model.json"))
    ctx.extra = {"examples": int(len(y)), "positive": int(y.sum()), "model_sha256": digest}
    return ctx.extra


def cmd_evaluate(ctx: Context) -> dict:
    X, y = _training_data(ctx)
    c = ctx.config["classifier"]
    forest = _forest_params(ctx.config)
    tree = TreeParams(forest.max_depth, forest.min_samples_split, forest.min_samples_leaf, None)
    reports = {}
    for kind in ("forest", "tree"):
        spec = ModelSpec(kind, forest, tree)
        reports[kind] = cross_validate((X, y), spec, int(c["folds"]), ctx.config.seed, ctx.config.workers)
    out = {
        kind: {k: v for k, v in asdict(r).items() if k != "out_of_fold"}
        for kind, r in reports.items()
    }
    write_json(ctx.emit("evaluation.json"), out)
    rows = [
        [kind, row["class"], repr(row["precision"]), repr(row["recall"]), repr(row["f1"]), row["support"]]
        for kind, r in reports.items()
        for row in r.rows()
    ]
    write_tsv(ctx.emit("evaluation.tsv"), ["model", "class", "precision", "recall", "f1", "support"], rows)
    ctx.extra = {kind: {"f1": r.f1, "precision": r.precision, "recall": r.recall} for kind, r in reports.items()}
    return ctx.extra


def cmd_classify(ctx: Context) -> dict:
    model = load_model(ctx.artifact("model.json"))
    profiles = ctx.profiles
    X = feature_matrix(profiles, ctx.table(), ctx.lexicon())
    labels, scores = predict_many(model, X) if len(profiles) else ([], [])
    rows = sorted(
        [ctx.pseudo(p.account_id), repr(float(s)), "positive" if lab else "negative"]
        for p, s, lab in zip(profiles, scores, labels)
    )
    write_tsv(ctx.emit("predictions.tsv"), ["account", "score", "label"], rows)
    ctx.extra = {"classified": len(rows), "positive": int(sum(int(v) for v in labels))}
    return ctx.extra


# ------------------------------------------------------------------ expand


def _source(ctx: Context) -> FileAccountSource:
    edges = load_edges_report(ctx.require("edges")).edges
    return FileAccountSource(ctx.profiles, edges)


def cmd_expand(ctx: Context) -> dict:
    model = load_model(ctx.artifact("model.json"))
    seeds = [str(s) for s in ctx.config["expand"]["seeds"]]
    if not seeds:
        raise ConfigError("expand.seeds must list at least one account")
    run = snowball_expand(seeds, _source(ctx), model, int(ctx.config["expand"]["stages"]), ctx.table(), ctx.lexicon())
    rows = [{"account": ctx.pseudo(s), "role": "seed", "stage": 0, "score": None} for s in run.seeds]
    rows += [
        {"account": ctx.pseudo(a), "role": "accepted", "stage": stage, "score": run.scores[a]}
        for a, stage in run.accepted.items()
    ]
    rows.sort(key=lambda r: (r["stage"], r["account"]))
    write_jsonl(ctx.emit(EXPANSION), rows)
    summary = {
        "seeds": len(run.seeds),
        "stages": [
            {
                "stage": s,
                "examined": len(run.frontiers[s]),
                "accepted": len(run.accepted_in(s)),
                "rejected": run.rejected[s - 1],
                "unavailable": run.unavailable[s - 1],
            }
            for s in range(1, run.completed_stages + 1)
        ],
        "network_size": len(run.network()),
    }
    write_json(ctx.emit("expansion_summary.json"), summary)
    ctx.extra = summary
    return summary


# ------------------------------------------------------------------- graph


def cmd_graph(ctx: Context) -> dict:
    network = {r["account"] for r in read_jsonl(ctx.artifact(EXPANSION))}
    loaded = load_edges_report(ctx.require("edges"))
    unresolved = unresolved_endpoints(loaded.edges, ctx.profiles)
    alias = ctx.pseudo
    g = FollowGraph.from_edges(network, ((alias(e.follower_id), alias(e.followee_id)) for e in loaded.edges))
    write_graph(g, ctx.emit("graph.tsv"))
    summary = {
        "nodes": g.n,
        "edges": g.n_edges,
        "edges_outside_network": g.dropped_edges,
        "unresolved_endpoints": len(unresolved),
        "self_loops_dropped": loaded.self_loops,
        "duplicate_edges_collapsed": loaded.duplicates,
    }
    write_json(ctx.emit("graph_summary.json"), summary)
    ctx.extra = summary
    return summary


def _centrality_params(config: Config) -> CentralityParams:
    c = config["centrality"]
    return CentralityParams(
        degree_mode=c["degree_mode"],
        eigen_tol=float(c["eigen_tol"]),
        eigen_max_iter=int(c["eigen_max_iter"]),
        eigen_transpose=bool(c["eigen_transpose"]),
        damping=float(c["damping"]),
        pagerank_tol=float(c["pagerank_tol"]),
        pagerank_max_iter=int(c["pagerank_max_iter"]),
    )


def cmd_centrality(ctx: Context) -> dict:
    summary = cmd_graph(ctx)
    g = read_graph(ctx.out / "graph.tsv")
    report = compute_centrality(g, _centrality_params(ctx.config), ctx.config.workers)
    report.write(ctx.emit("centrality.tsv"))
    write_tsv(
        ctx.emit("score_curves.tsv"),
        ["measure", "rank", "score"],
        [[m, r, repr(s)] for m, r, s in report.score_curves()],
    )
    ctx.extra = {**summary, "top": report.rows[0].account if report.rows else None}
    return ctx.extra


def _report(ctx: Context) -> CentralityReport:
    return CentralityReport.read(ctx.artifact("centrality.tsv"))


def _clamp(k: int, n: int, what: str) -> int:
    if k > n:
        logger.warning("%s: k=%d exceeds node count %d; clamping", what, k, n)
        return n
    return k


def cmd_rank(ctx: Context) -> dict:
    report = _report(ctx)
    k = _clamp(int(ctx.config["rank"]["top_k"]), len(report.rows), "rank")
    rows = []
    for m in MEASURES:
        scores = report.measure(m, normalized=True)
        for i, acct in enumerate(sorted(scores, key=lambda a: (-scores[a], a))[:k], start=1):
            rows.append([m, i, acct, repr(scores[acct])])
    rows += [["fused", r.rank, r.account, repr(r.fused)] for r in report.rows[:k]]
    write_tsv(ctx.emit("rank.tsv"), ["measure", "rank", "account", "score"], rows)
    ctx.extra = {"k": k, "top_fused": report.rows[0].account if report.rows else None}
    return ctx.extra


def cmd_temporal(ctx: Context) -> dict:
    report = _report(ctx)
    by_alias = ctx.by_pseudonym()
    network = [by_alias[a] for a in report.by_account() if a in by_alias]
    # temporal_report works on ids; here the ids are pseudonyms
    aliased = [type(p)(**{**p.__dict__, "account_id": ctx.pseudo(p.account_id)}) for p in network]
    t = ctx.config["temporal"]
    tr = temporal_report(aliased, [r.account for r in report.rows], tuple(t["top_k"]), tuple(t["window"]))
    write_json(ctx.emit("temporal.json"), tr.to_dict())
    ctx.extra = tr.to_dict()["era_fraction_top_k"]
    return tr.to_dict()


def cmd_subgraph(ctx: Context) -> dict:
    report = _report(ctx)
    g = read_graph(ctx.artifact("graph.tsv"))
    measure = ctx.config["subgraph"]["measure"]
    scores = report.fused() if measure == "fused" else report.measure(measure, normalized=True)
    k = _clamp(int(ctx.config["subgraph"]["k"]), g.n, "subgraph")
    sub = top_k_subgraph(g, scores, k)
    sub.write(ctx.emit("subgraph_nodes.csv"), ctx.emit("subgraph_edges.csv"))
    ctx.extra = {"k": k, "nodes": sub.graph.n, "edges": sub.graph.n_edges}
    return ctx.extra


# ------------------------------------------------------------------ topics


def _lda_params(t: dict) -> LDAParams:
    return LDAParams(
        iterations=int(t["iterations"]),
        alpha=None if t["alpha"] is None else float(t["alpha"]),
        beta=float(t["beta"]),
        top_n=int(t["top_n"]),
        window=int(t["window"]),
    )


def cmd_topics(ctx: Context) -> dict:
    t = ctx.config["topics"]
    report = _report(ctx)
    tweets = load_tweets(ctx.require("tweets"))
    by_account: dict[str, list] = {}
    for tw in tweets:
        by_account.setdefault(ctx.pseudo(tw.account_id), []).append(tw)
    overrides = {}
    for key, k in (t["k_override"] or {}).items():
        key = str(key)
        overrides[key if key.startswith(Pseudonymizer.prefix) else ctx.pseudo(key)] = int(k)

    params = _lda_params(t)
    stopwords = load_stopwords(ctx.config.lexicon_path("stopwords"))
    contractions = load_contractions(ctx.config.lexicon_path("contractions"))
    bigrams = BigramParams(int(t["bigram_min_count"]), float(t["bigram_min_pmi"]))
    summary = []
    for position, acct in enumerate(report.top_k(int(t["accounts"])), start=1):
        entry = {"account": acct, "influence_rank": position}
        sel = select_recent(by_account.get(acct, []), int(t["tweet_limit"]))
        entry["tweets_used"] = len(sel.tweets)
        entry["tweets_per_year"] = {str(y): n for y, n in sel.years.items()}
        if len(sel.tweets) < int(t["tweet_limit"]):
            logger.info("%s: %d tweets available (limit %d)", acct, len(sel.tweets), t["tweet_limit"])
        corpus = preprocess(sel.tweets, stopwords, contractions, bigrams)
        entry["documents"] = len(corpus.documents)
        entry["empty_documents_dropped"] = corpus.dropped_empty
        if not corpus.documents:
            logger.warning("%s: empty corpus after preprocessing; skipped", acct)
            entry["status"] = "empty corpus"
            summary.append(entry)
            continue
        sweep = sweep_topic_numbers(corpus, tuple(t["grid"]), int(t["seeds_per_k"]), ctx.config.seed, params, ctx.config.workers)
        k = overrides.get(acct, sweep.selected_k)
        model = lda_fit(corpus, k, params.iterations, params.alpha, params.beta, sweep_seed(ctx.config.seed, k, 1000))
        model.coherence = uci_coherence(model, corpus, min(params.top_n, len(corpus.vocabulary)), params.window)
        base = f"topics/{acct}"
        write_tsv(
            ctx.emit(f"{base}/coherence.tsv"),
            ["K", "mean_coherence", "per_seed"],
            [[r["K"], repr(r["mean_coherence"]), ",".join(map(repr, r["per_seed"]))] for r in sweep.curve_rows()],
        )
        blocks = topic_report(model, params.top_n)
        write_json(ctx.emit(f"{base}/topics.json"), {"K": k, "coherence": model.coherence, "topics": blocks})
        ctx.emit(f"{base}/topics.txt").write_text(topic_report_text(model, params.top_n), encoding="utf-8")
        entry.update(status="ok", selected_k=sweep.selected_k, used_k=k, k_overridden=acct in overrides,
                     coherence=model.coherence)
        summary.append(entry)
    write_json(ctx.emit("topics_summary.json"), summary)
    ctx.extra = {"accounts": [{k: e[k] for k in e if k in ("account", "used_k", "k_overridden", "status")} for e in summary],
                 "k_override": overrides}
    return {"accounts": summary}


# ------------------------------------------------------------------ report


def cmd_report(ctx: Context) -> dict:
    out = ctx.out
    lines = ["# Pipeline report", ""]

    def section(title, name, render):
        p = out / name
        if p.exists():
            ctx._track(p)
            lines.extend([f"## {title}", ""])
            lines.extend(render(p))
            lines.append("")

    def json_block(p):
        return ["```", p.read_text(encoding="utf-8").rstrip(), "```"]

    def head_rows(p, n=12):
        rows = p.read_text(encoding="utf-8").splitlines()
        return ["```", *rows[: n + 1], "```"]

    section("Classifier evaluation", "evaluation.tsv", head_rows)
    section("Snowball expansion", "expansion_summary.json", json_block)
    section("Graph", "graph_summary.json", json_block)
    section("Top accounts", "rank.tsv", lambda p: head_rows(p, 60))
    section("Temporal", "temporal.json", json_block)
    section("Topics", "topics_summary.json", json_block)
    for p in sorted(out.glob("topics/*/topics.txt")):
        ctx._track(p)
        lines.extend([f"### Topics for {p.parent.name}", "", "```", p.read_text(encoding="utf-8").rstrip(), "```", ""])
    ctx.emit("report.md").write_text("\n".join(lines), encoding="utf-8")
    ctx.extra = {}
    return {}


COMMANDS = {
    "filter": (cmd_filter, ("snapshots",)),
    "label": (cmd_label, ("snapshots",)),
    "train": (cmd_train, ("snapshots",)),
    "evaluate": (cmd_evaluate, ("snapshots",)),
    "classify": (cmd_classify, ("snapshots",)),
    "expand": (cmd_expand, ("snapshots", "edges")),
    "graph": (cmd_graph, ("snapshots", "edges")),
    "centrality": (cmd_centrality, ("snapshots", "edges")),
    "rank": (cmd_rank, ()),
    "temporal": (cmd_temporal, ("snapshots",)),
    "subgraph": (cmd_subgraph, ()),
    "topics": (cmd_topics, ("tweets",)),
    "report": (cmd_report, ()),
}


def run_command(name: str, config: Config) -> dict:
    func, required = COMMANDS[name]
    config.validate(required)
    started = time.perf_counter()
    ctx = Context(config)
    result = func(ctx)
    ctx.record(name, started)
    return result
