"""Command-line verbs: exit codes, messages, and overrides."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from progsim.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def _conf(toy_tree: Path) -> str:
    return str(toy_tree / "run.toml")


def test_validate_ok(toy_tree, capsys):
    assert main(["validate", "--config", _conf(toy_tree)]) == 0
    out = capsys.readouterr().out
    assert "configuration OK (14 measures)" in out


def test_validate_reports_every_problem(toy_tree, capsys):
    conf = toy_tree / "run.toml"
    text = conf.read_text(encoding="utf-8")
    text = text.replace('manifest = "manifest.csv"', 'manifest = "gone.csv"')
    text = text.replace("jobs = 1", "jobs = 0")
    conf.write_text(text, encoding="utf-8")
    assert main(["validate", "--config", str(conf)]) == 2
    err = capsys.readouterr().err
    assert err.count("config error:") >= 2
    assert "gone.csv" in err
    assert "jobs" in err


def test_run_and_cached_rerun(toy_tree, capsys):
    assert main(["run", "--config", _conf(toy_tree)]) == 0
    out = capsys.readouterr().out
    assert "run complete: 14 measures, 0 pair values from cache, 210 computed" in out
    assert str(toy_tree / "out") in out
    assert (toy_tree / "out" / "measures.csv").is_file()

    assert main(["run", "--config", _conf(toy_tree)]) == 0
    out = capsys.readouterr().out
    assert "210 pair values from cache, 0 computed" in out


def test_run_output_override(toy_tree, tmp_path_factory, capsys):
    other = tmp_path_factory.mktemp("elsewhere")
    assert main(["run", "--config", _conf(toy_tree),
                 "--output", str(other)]) == 0
    assert (other / "measures.csv").is_file()
    assert not (toy_tree / "out" / "measures.csv").exists()


def test_seed_override_reaches_manifest(toy_tree, capsys):
    assert main(["run", "--config", _conf(toy_tree), "--seed", "99"]) == 0
    manifest = json.loads((toy_tree / "out" / "run_manifest.json").read_text(
        encoding="utf-8"))
    assert manifest["seed"] == 99


def test_report_after_run(toy_tree, capsys):
    assert main(["run", "--config", _conf(toy_tree)]) == 0
    assert main(["report", "--config", _conf(toy_tree)]) == 0
    out = capsys.readouterr().out
    assert "reports in" in out
    for name in ("correlations.csv", "clusters.csv", "cluster_benchmarks.csv"):
        assert (toy_tree / "out" / name).is_file()


def test_report_threshold_override(toy_tree):
    assert main(["run", "--config", _conf(toy_tree)]) == 0
    assert main(["report", "--config", _conf(toy_tree),
                 "--threshold", "1.0"]) == 0
    rows = (toy_tree / "out" / "clusters.csv").read_text(
        encoding="utf-8").splitlines()[1:]
    # with a floor of 1.0, any multi-member cluster holds perfect correlates
    by_cluster: dict[str, list[float]] = {}
    for line in rows:
        cid, _, intra = line.split(",")
        by_cluster.setdefault(cid, []).append(float(intra))
    for intras in by_cluster.values():
        if len(intras) > 1:
            assert min(intras) >= 1.0 - 1e-12


def test_report_before_run_fails(toy_tree, capsys):
    assert main(["report", "--config", _conf(toy_tree)]) == 1
    assert "error:" in capsys.readouterr().err


def test_selftest_verb(toy_tree, capsys):
    conf = toy_tree / "run.toml"
    conf.write_text(conf.read_text(encoding="utf-8") +
                    "\n[selftest]\nmin_chars = 100\n", encoding="utf-8")
    assert main(["selftest", "--config", str(conf)]) == 0
    out = capsys.readouterr().out
    assert "selftest over 6 qualifying documents" in out
    assert "separation:" in out
    assert (toy_tree / "out" / "selftest.json").is_file()


def test_clean_cache_verb(toy_tree, capsys):
    assert main(["run", "--config", _conf(toy_tree)]) == 0
    capsys.readouterr()
    assert main(["clean-cache", "--config", _conf(toy_tree)]) == 0
    assert "removed 14 cache files" in capsys.readouterr().out
    assert main(["clean-cache", "--config", _conf(toy_tree)]) == 0
    assert "removed 0 cache files" in capsys.readouterr().out


def test_export_sentences_verb(toy_tree, tmp_path_factory, capsys):
    target = tmp_path_factory.mktemp("sent")
    assert main(["export-sentences", "--config", _conf(toy_tree),
                 "--target", str(target)]) == 0
    assert "wrote sentence lists for 6 documents" in capsys.readouterr().out
    assert len(list(target.glob("*.sentences.json"))) == 6


def test_psem_check_verb(capsys):
    files = sorted((FIXTURES / "psem").glob("*.psem"))
    assert main(["psem-check"] + [str(f) for f in files[:2]]) == 0
    out = capsys.readouterr().out
    assert out.count("producer=fixembed") == 2
    assert "dim=5" in out and "rows=5" in out


def test_psem_check_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.psem"
    bad.write_bytes(b"not a matrix")
    assert main(["psem-check", str(bad)]) == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_verb_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_config_argument():
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2
