import json
import re
from pathlib import Path

import pytest

from anonnet.cli import main
from anonnet.features import FEATURE_NAMES
from anonnet.ingest import Pseudonymizer, load_snapshots, write_snapshots
from anonnet.netgraph import FollowGraph, compute_centrality
from anonnet.synthetic import FIXTURE_KEY, _e2e_ids
from conftest import make_profile

CHAIN = ("filter", "label", "train", "expand", "centrality", "rank", "temporal", "topics")


def run(cfg: Path, *args) -> int:
    return main(["--config", str(cfg), *args])


def read_rows(path: Path) -> list[list[str]]:
    return [line.split("\t") for line in path.read_text().splitlines()]


def artifacts(out: Path) -> dict[str, bytes]:
    return {str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file() and p.name != "manifest.json"}


def stable_manifest(out: Path) -> dict:
    m = json.loads((out / "manifest.json").read_text())
    for entry in m["commands"].values():
        entry.pop("wall_time_s")
        entry.pop("finished_at")
    return m


def write_config(d: Path, **over) -> Path:
    cfg = json.loads((d / "config.json").read_text())
    for key, value in over.items():
        if isinstance(value, dict):
            cfg.setdefault(key, {}).update(value)
        else:
            cfg[key] = value
    path = d / "config.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture(scope="module")
def chain_run(tmp_path_factory):
    import shutil

    from conftest import FIXTURES

    d = tmp_path_factory.mktemp("chain") / "e2e"
    shutil.copytree(FIXTURES / "e2e", d)
    codes = {cmd: run(d / "config.json", cmd) for cmd in CHAIN}
    return d, codes


def test_chain_exit_codes(chain_run):
    _, codes = chain_run
    assert codes == {cmd: 0 for cmd in CHAIN}


def test_chain_top_account_is_hub(chain_run):
    d, _ = chain_run
    hub = Pseudonymizer(FIXTURE_KEY.encode())("s_hub")
    rows = read_rows(d / "out" / "rank.tsv")
    fused = [r for r in rows[1:] if r[0] == "fused"]
    assert fused[0][1:3] == ["1", hub]
    assert read_rows(d / "out" / "centrality.tsv")[1][0] == hub


def test_expansion_matches_fixture(chain_run):
    d, _ = chain_run
    pseudo = Pseudonymizer(FIXTURE_KEY.encode())
    _, _, stage1, stage2, *_ = _e2e_ids()
    rows = [json.loads(line) for line in (d / "out" / "expansion.jsonl").read_text().splitlines()]
    got = {r["account"]: r["stage"] for r in rows}
    expected = {pseudo(a): 1 for a in stage1} | {pseudo(a): 2 for a in stage2}
    expected |= {pseudo("s_hub"): 0, pseudo("s_second"): 0}
    assert got == expected


def test_temporal_counts(chain_run):
    d, _ = chain_run
    t = json.loads((d / "out" / "temporal.json").read_text())
    hub, seed2, stage1, stage2, *_ = _e2e_ids()
    network = {hub, seed2, *stage1, *stage2}
    hist: dict = {}
    for p in load_snapshots(d / "snapshots.jsonl"):
        if p.account_id in network:
            hist[str(p.created_at.year)] = hist.get(str(p.created_at.year), 0) + 1
    assert t["created_per_year"] == dict(sorted(hist.items()))
    assert sum(t["created_per_year"].values()) == 20


def test_no_raw_ids_in_outputs(chain_run):
    d, _ = chain_run
    raw = [p.account_id for p in load_snapshots(d / "snapshots.jsonl")] + ["gone_01", "gone_02"]
    pattern = re.compile("|".join(rf"(?<![\w-]){re.escape(r)}(?![\w-])" for r in raw))
    for path in (d / "out").rglob("*"):
        if path.is_file():
            assert not pattern.search(path.read_text(encoding="utf-8")), path


def test_manifest_single_and_complete(chain_run):
    d, _ = chain_run
    assert [p.name for p in d.rglob("manifest.json")] == ["manifest.json"]
    m = json.loads((d / "out" / "manifest.json").read_text())
    assert set(m["commands"]) == set(CHAIN)
    for cmd, entry in m["commands"].items():
        assert entry["seed"] == 7 and len(entry["config_hash"]) == 64
        assert entry["outputs"], cmd


def test_rerun_is_byte_identical(chain_run, e2e_dir):
    d, _ = chain_run
    for cmd in CHAIN:
        assert run(e2e_dir / "config.json", cmd) == 0
    assert artifacts(e2e_dir / "out") == artifacts(d / "out")
    assert stable_manifest(e2e_dir / "out") == stable_manifest(d / "out")


def test_remaining_commands(chain_run):
    d, _ = chain_run
    for cmd in ("graph", "subgraph", "classify", "evaluate", "report"):
        assert run(d / "config.json", cmd) == 0, cmd
    assert (d / "out" / "subgraph_nodes.csv").read_text().startswith("Id,Label,score\n")
    assert (d / "out" / "report.md").read_text().strip()


# ---------------------------------------------------------------- commands


def _ten_profiles(d: Path) -> Path:
    names = ["anon_news", "bob", "l3g10n", "alice", "chen", "anonymous_x", "kate", "legion99", "noah", "ivan"]
    profiles = [
        make_profile(f"r{i}", username=n, screen_name=n.title(), description="we are legion" if i % 2 else "",
                     has_fawkes_image=i in (0, 2, 7))
        for i, n in enumerate(names)
    ]
    write_snapshots(profiles, d / "snapshots.jsonl")
    cfg = {"seed": 1, "pseudonymizer_key": "k", "paths": {"snapshots": "snapshots.jsonl"}}
    (d / "config.json").write_text(json.dumps(cfg))
    return d / "config.json"


def test_filter_counts_and_label_subset(tmp_path):
    cfg = _ten_profiles(tmp_path)
    assert run(cfg, "filter") == 0
    cands = (tmp_path / "out" / "candidates.jsonl").read_text().splitlines()
    assert len(cands) == 4
    assert run(cfg, "label") == 0
    labels = [json.loads(x) for x in (tmp_path / "out" / "labels.jsonl").read_text().splitlines()]
    cand_ids = {json.loads(x)["account"] for x in cands}
    positives = {r["account"] for r in labels if r["label"] == "positive"}
    assert positives <= cand_ids
    # r0 and r2 carry the image but no keyword in the description; r7 has both
    assert len(positives) == 1


def test_label_without_images_gives_no_positives(tmp_path):
    cfg = _ten_profiles(tmp_path)
    profiles = [p.__class__(**{**p.__dict__, "has_fawkes_image": False}) for p in load_snapshots(tmp_path / "snapshots.jsonl")]
    write_snapshots(profiles, tmp_path / "snapshots.jsonl")
    assert run(cfg, "filter") == 0 and run(cfg, "label") == 0
    labels = [json.loads(x) for x in (tmp_path / "out" / "labels.jsonl").read_text().splitlines()]
    assert not [r for r in labels if r["label"] == "positive"]


def test_filter_empty_snapshots(tmp_path):
    (tmp_path / "snapshots.jsonl").write_text("")
    (tmp_path / "config.json").write_text(json.dumps({"seed": 1, "pseudonymizer_key": "k", "paths": {"snapshots": "snapshots.jsonl"}}))
    assert run(tmp_path / "config.json", "filter") == 0
    assert (tmp_path / "out" / "candidates.jsonl").read_text() == ""


def test_train_twice_same_digest(e2e_dir):
    cfg = e2e_dir / "config.json"
    assert run(cfg, "filter") == 0 and run(cfg, "label") == 0
    assert run(cfg, "train") == 0
    first = (e2e_dir / "out" / "model.json").read_bytes()
    assert run(cfg, "train") == 0
    assert (e2e_dir / "out" / "model.json").read_bytes() == first


def test_classify_without_model(e2e_dir, caplog):
    assert run(e2e_dir / "config.json", "classify") == 2
    assert "model.json" in caplog.text


def test_exit_codes_for_config_and_data_errors(e2e_dir, tmp_path):
    cfg = write_config(e2e_dir, bogus_key=1)
    assert run(cfg, "filter") == 1
    cfg = json.loads(cfg.read_text())
    cfg.pop("bogus_key")
    cfg.pop("seed")
    (e2e_dir / "config.json").write_text(json.dumps(cfg))
    assert run(e2e_dir / "config.json", "filter") == 1
    assert main(["--config", str(e2e_dir / "config.json"), "--seed", "3", "filter"]) == 0
    (tmp_path / "bad.jsonl").write_text('{"account_id": "x"}\n')
    cfg["seed"] = 1
    cfg["paths"]["snapshots"] = str(tmp_path / "bad.jsonl")
    (e2e_dir / "config.json").write_text(json.dumps(cfg))
    assert run(e2e_dir / "config.json", "filter") == 2


def test_unknown_command_exits_one():
    with pytest.raises(SystemExit) as err:
        main(["nonsense"])
    assert err.value.code == 1


def test_nonconvergence_exits_three(e2e_dir):
    cfg = e2e_dir / "config.json"
    for cmd in ("filter", "label", "train", "expand"):
        assert run(cfg, cmd) == 0
    write_config(e2e_dir, centrality={"eigen_max_iter": 1})
    assert run(cfg, "centrality") == 3


def test_k_override_recorded(e2e_dir):
    cfg = e2e_dir / "config.json"
    for cmd in ("filter", "label", "train", "expand", "centrality"):
        assert run(cfg, cmd) == 0
    write_config(e2e_dir, topics={"k_override": {"s_hub": 4}, "accounts": 1, "grid": [2, 3], "iterations": 30})
    assert run(cfg, "topics") == 0
    hub = Pseudonymizer(FIXTURE_KEY.encode())("s_hub")
    summary = json.loads((e2e_dir / "out" / "topics_summary.json").read_text())
    assert summary[0]["account"] == hub and summary[0]["used_k"] == 4 and summary[0]["k_overridden"]
    blocks = json.loads((e2e_dir / "out" / "topics" / hub / "topics.json").read_text())
    assert blocks["K"] == 4 and len(blocks["topics"]) == 4
    manifest = json.loads((e2e_dir / "out" / "manifest.json").read_text())
    assert manifest["commands"]["topics"]["extra"]["k_override"] == {hub: 4}


def test_output_dir_flag(e2e_dir, tmp_path):
    out = tmp_path / "elsewhere"
    assert main(["--config", str(e2e_dir / "config.json"), "--output-dir", str(out), "filter"]) == 0
    assert (out / "candidates.jsonl").exists() and (out / "manifest.json").exists()


def test_yaml_config(e2e_dir):
    import yaml

    cfg = json.loads((e2e_dir / "config.json").read_text())
    (e2e_dir / "config.yaml").write_text(yaml.safe_dump(cfg))
    assert run(e2e_dir / "config.yaml", "filter") == 0


def test_schema_command(capsys):
    assert main(["schema"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[1] for line in lines] == list(FEATURE_NAMES)


def test_six_node_fused_winner():
    # hub h follows and is followed by five leaves: h is maximal on every measure
    leaves = "abcde"
    edges = [(x, "h") for x in leaves] + [("h", x) for x in leaves]
    rep = compute_centrality(FollowGraph.from_edges("habcde", edges))
    assert rep.rows[0].account == "h" and rep.rows[0].fused == 1.0
    assert rep.by_account()["h"].raw[3] == 20.0  # all 5*4 leaf pairs route through h
    assert [r.account for r in rep.rows[1:]] == list(leaves)
