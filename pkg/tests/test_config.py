"""Configuration loading, measure-grid expansion, and aggregated validation."""

from __future__ import annotations

from pathlib import Path

import pytest

import toydata
from progsim.config import load_config, validate_config
from progsim.errors import ConfigError


def _specs(tree: Path):
    cfg = load_config(tree / "run.toml")
    return cfg, validate_config(cfg)


def test_load_config_from_toy_tree(toy_tree):
    cfg = load_config(toy_tree / "run.toml")
    assert cfg.manifest == toy_tree / "manifest.csv"
    assert cfg.seed == 7
    assert cfg.jobs == 1
    assert cfg.output == toy_tree / "out"
    assert cfg.cache_dir == toy_tree / "out" / "cache"
    assert cfg.threshold == 0.75
    assert cfg.sentence_sample_size == 24
    assert cfg.summary_chunks == 3 and cfg.summary_per_chunk == 2
    assert "w2v" in cfg.models


def test_manifest_required(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[run]\nseed = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="manifest"):
        load_config(p)


def test_relative_paths_resolve_against_config_dir(tmp_path):
    nested = tmp_path / "conf"
    nested.mkdir()
    p = nested / "c.toml"
    p.write_text('[corpus]\nmanifest = "m.csv"\n[run]\noutput = "/tmp/abs"\n',
                 encoding="utf-8")
    cfg = load_config(p)
    assert cfg.manifest == nested / "m.csv"
    assert cfg.output == Path("/tmp/abs")


def test_toy_grid_expansion(toy_tree):
    cfg, specs = _specs(toy_tree)
    ids = [s.measure_id for s in specs]
    assert ids == [
        "wf-tf-l1", "wf-tf-l2", "wf-tf-cos",
        "wf-tfidf-l1", "wf-tfidf-l2", "wf-tfidf-cos",
        "wf-tf-cos_sampled", "wf-tf-cos_summ",
        "styl-delta_N10", "styl-cos_N10",
        "emb-w2v-cos", "emb-w2v-wmd",
        "ctx-fixembed-mean", "ctx-fixembed-max",
    ]
    assert len(ids) == len(set(ids))


def test_toy_grid_orientations(toy_tree):
    _, specs = _specs(toy_tree)
    orient = {s.measure_id: s.orientation for s in specs}
    assert orient["wf-tf-cos"] == 1
    assert orient["wf-tf-l1"] == -1
    assert orient["wf-tfidf-l2"] == -1
    assert orient["styl-delta_N10"] == -1
    assert orient["styl-cos_N10"] == -1      # stylometric cos is a distance
    assert orient["emb-w2v-cos"] == 1
    assert orient["emb-w2v-wmd"] == -1
    assert orient["ctx-fixembed-mean"] == 1


def test_grid_cartesian_product_counts(tmp_path):
    tree = toydata.write_config(tmp_path)
    extra = """
[[measures]]
family = "stylometry"
metric = ["delta", "eder", "argamon"]
n_words = [50, 100]
length_correction = ["none", "sampling"]
"""
    conf = tree / "run.toml"
    conf.write_text(conf.read_text(encoding="utf-8") + extra, encoding="utf-8")
    cfg, specs = _specs(tree)
    new = [s for s in specs if s.measure_id.startswith("styl-")
           and ("N50" in s.measure_id or "N100" in s.measure_id)]
    assert len(new) == 3 * 2 * 2
    assert "styl-eder_N100_sampled" in {s.measure_id for s in new}


def test_spec_params_carry_grid_values(toy_tree):
    _, specs = _specs(toy_tree)
    by_id = {s.measure_id: s for s in specs}
    assert by_id["styl-delta_N10"].params == {"metric": "delta", "n_words": 10}
    assert by_id["wf-tfidf-l2"].params == {"weighting": "tfidf", "metric": "l2"}
    assert by_id["emb-w2v-wmd"].params == {"model": "w2v", "metric": "wmd"}
    ctx = by_id["ctx-fixembed-max"].params
    assert ctx["unit"] == "sentence" and ctx["pooling"] == "max"
    assert by_id["wf-tf-cos_sampled"].correction == "sampling"
    assert by_id["wf-tf-cos_summ"].correction == "summarization"


def test_validation_aggregates_all_problems(tmp_path):
    tree = toydata.write_config(tmp_path)
    conf = tree / "run.toml"
    text = conf.read_text(encoding="utf-8")
    text = text.replace('manifest = "manifest.csv"', 'manifest = "gone.csv"')
    text = text.replace("jobs = 1", "jobs = 0")
    text += """
[[measures]]
family = "teleology"

[[measures]]
family = "wordfreq"
metric = "hamming"
"""
    conf.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        _specs(tree)
    problems = err.value.problems
    assert any("manifest" in p for p in problems)
    assert any("jobs" in p for p in problems)
    assert any("teleology" in p for p in problems)
    assert any("hamming" in p for p in problems)
    assert len(problems) >= 4


def test_unknown_block_key_reported(tmp_path):
    tree = toydata.write_config(tmp_path)
    conf = tree / "run.toml"
    conf.write_text(conf.read_text(encoding="utf-8") + """
[[measures]]
family = "stylometry"
metric = "delta"
n_words = 10
flavour = "mild"
""", encoding="utf-8")
    with pytest.raises(ConfigError, match="flavour"):
        _specs(tree)


def test_duplicate_measure_ids_rejected(tmp_path):
    tree = toydata.write_config(tmp_path)
    conf = tree / "run.toml"
    conf.write_text(conf.read_text(encoding="utf-8") + """
[[measures]]
family = "stylometry"
metric = "delta"
n_words = 10
""", encoding="utf-8")
    with pytest.raises(ConfigError, match="duplicate measure id"):
        _specs(tree)


def test_embedding_model_must_be_declared(tmp_path):
    tree = toydata.write_config(tmp_path)
    conf = tree / "run.toml"
    conf.write_text(conf.read_text(encoding="utf-8") + """
[[measures]]
family = "embedding"
model = "ghost"
metric = "cos"
""", encoding="utf-8")
    with pytest.raises(ConfigError, match="ghost"):
        _specs(tree)


def test_model_entries_validated(tmp_path):
    tree = toydata.write_config(tmp_path)
    conf = tree / "run.toml"
    text = conf.read_text(encoding="utf-8")
    text = text.replace('format = "word2vec-text"', 'format = "pickle"')
    conf.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match="format"):
        _specs(tree)


def test_stylometry_n_words_validated(tmp_path):
    tree = toydata.write_config(tmp_path)
    conf = tree / "run.toml"
    conf.write_text(conf.read_text(encoding="utf-8") + """
[[measures]]
family = "stylometry"
metric = "eder"
n_words = 1
""", encoding="utf-8")
    with pytest.raises(ConfigError, match="n_words"):
        _specs(tree)


def test_contextual_sampling_rejected(tmp_path):
    tree = toydata.write_config(
        tmp_path, psem_index=Path(__file__).parent / "fixtures" / "psem" / "index.csv")
    conf = tree / "run.toml"
    text = conf.read_text(encoding="utf-8").replace(
        'pooling = ["mean", "max"]\nlength_correction = ["none"]',
        'pooling = ["mean", "max"]\nlength_correction = "sampling"')
    conf.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match="sampling"):
        _specs(tree)


def test_contextual_index_must_exist(tmp_path):
    tree = toydata.write_config(tmp_path, psem_index=tmp_path / "nowhere.csv")
    with pytest.raises(ConfigError, match="contextual index"):
        _specs(tree)


def test_benchmark_files_checked(tmp_path):
    tree = toydata.write_config(tmp_path)
    (tree / "bench" / "survey.csv").unlink()
    with pytest.raises(ConfigError, match="survey"):
        _specs(tree)


def test_candidacies_need_election_order(tmp_path):
    tree = toydata.write_config(tmp_path)
    conf = tree / "run.toml"
    text = conf.read_text(encoding="utf-8").replace(
        'elections = ["e0", "e1", "e2"]', "")
    conf.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match="elections"):
        _specs(tree)


def test_no_measures_rejected(tmp_path):
    p = tmp_path / "c.toml"
    (tmp_path / "m.csv").write_text("doc_id,party_id,election_id,text_file\n",
                                    encoding="utf-8")
    p.write_text('[corpus]\nmanifest = "m.csv"\n', encoding="utf-8")
    cfg = load_config(p)
    with pytest.raises(ConfigError, match="measures"):
        validate_config(cfg)
