"""Run configuration: one TOML file fully specifies a batch run.

The measure grid is written as [[measures]] blocks whose fields may be
scalars or lists; list-valued fields expand as a cartesian product into
individual measure specs with stable ids:

    wf-<weighting>-<metric>            wordfreq
    styl-<metric>_N<n>                 stylometry
    emb-<model>-<metric>               static embeddings
    ctx-<name>-<pooling>               imported contextual embeddings

Length corrections append a suffix: none adds nothing, sampling adds
`_sampled`, summarization adds `_summ`.

Validation is aggregated: every problem found is reported in one ConfigError
rather than stopping at the first.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import stylometry, wordfreq
from .errors import ConfigError

FAMILIES = ("wordfreq", "stylometry", "embedding", "contextual")
CORRECTIONS = ("none", "sampling", "summarization")
EMB_METRICS = ("cos", "wmd")
POOLINGS = ("mean", "max")
SUFFIX = {"none": "", "sampling": "_sampled", "summarization": "_summ"}


@dataclass(frozen=True)
class MeasureSpec:
    """One fully expanded measure: a single column of the output table."""

    measure_id: str
    family: str
    correction: str
    orientation: int  # +1 similarity, -1 distance
    params: dict

    def __hash__(self):  # params is a dict; identity is the measure_id
        return hash(self.measure_id)


@dataclass
class RunConfig:
    config_path: Path
    manifest: Path
    lemmas: Path | None = None
    lemma_policy: str = "keep-surface"
    stopwords: Path | None = None
    abbreviations: list[str] = field(default_factory=list)
    seed: int = 0
    output: Path = Path("out")
    cache: Path | None = None  # defaults to <output>/cache
    jobs: int = 1
    threshold: float = 0.75
    max_oov: float = 0.5
    n_samples: int = 256
    word_sample_size: int = 0  # 0 = token count of the shortest document
    sentence_sample_size: int = 120
    summary_chunks: int = 25
    summary_per_chunk: int = 4
    selftest_min_chars: int = 32768
    models: dict[str, dict] = field(default_factory=dict)
    measures: list[dict] = field(default_factory=list)
    benchmarks: dict = field(default_factory=dict)

    @property
    def cache_dir(self) -> Path:
        return self.cache if self.cache is not None else self.output / "cache"


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_config(path: str | Path) -> RunConfig:
    """Parse the TOML file; no path or grid checks happen here."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    base = path.parent

    corpus = raw.get("corpus", {})
    if "manifest" not in corpus:
        raise ConfigError(["[corpus] manifest is required"])
    run = raw.get("run", {})
    sampling = raw.get("sampling", {})
    summ = raw.get("summarization", {})
    selftest = raw.get("selftest", {})

    cfg = RunConfig(
        config_path=path,
        manifest=_resolve(base, corpus["manifest"]),
        lemmas=_resolve(base, corpus["lemmas"]) if "lemmas" in corpus else None,
        lemma_policy=corpus.get("lemma_policy", "keep-surface"),
        stopwords=_resolve(base, corpus["stopwords"]) if "stopwords" in corpus else None,
        abbreviations=list(corpus.get("abbreviations", [])),
        seed=int(run.get("seed", 0)),
        output=_resolve(base, run.get("output", "out")),
        cache=_resolve(base, run["cache"]) if "cache" in run else None,
        jobs=int(run.get("jobs", 1)),
        threshold=float(run.get("clustering_threshold", 0.75)),
        max_oov=float(run.get("max_oov", 0.5)),
        n_samples=int(sampling.get("n_samples", 256)),
        word_sample_size=int(sampling.get("word_size", 0)),
        sentence_sample_size=int(sampling.get("sentence_size", 120)),
        summary_chunks=int(summ.get("chunks", 25)),
        summary_per_chunk=int(summ.get("per_chunk", 4)),
        selftest_min_chars=int(selftest.get("min_chars", 32768)),
        models=dict(raw.get("models", {})),
        measures=list(raw.get("measures", [])),
        benchmarks=dict(raw.get("benchmarks", {})),
    )
    return cfg


def _aslist(value) -> list:
    return list(value) if isinstance(value, list) else [value]


def _expand_block(block: dict, index: int, cfg: RunConfig,
                  problems: list[str]) -> list[MeasureSpec]:
    """Expand one [[measures]] block into individual measure specs."""
    where = f"measures[{index}]"
    family = block.get("family")
    if family not in FAMILIES:
        problems.append(f"{where}: unknown family {family!r} (expected one of {FAMILIES})")
        return []

    allowed = {
        "wordfreq": {"family", "weighting", "metric", "length_correction"},
        "stylometry": {"family", "metric", "n_words", "length_correction"},
        "embedding": {"family", "model", "metric", "length_correction"},
        "contextual": {"family", "index", "name", "unit", "pooling", "length_correction"},
    }[family]
    for key in block:
        if key not in allowed:
            problems.append(f"{where}: unknown key {key!r} for family {family!r}")

    corrections = _aslist(block.get("length_correction", "none"))
    for c in corrections:
        if c not in CORRECTIONS:
            problems.append(f"{where}: unknown length_correction {c!r}")
    corrections = [c for c in corrections if c in CORRECTIONS]

    specs: list[MeasureSpec] = []
    if family == "wordfreq":
        weightings = _aslist(block.get("weighting", ["tf", "tfidf"]))
        metrics = _aslist(block.get("metric", list(wordfreq.METRICS)))
        for w in weightings:
            if w not in ("tf", "tfidf"):
                problems.append(f"{where}: unknown weighting {w!r}")
        for m in metrics:
            if m not in wordfreq.METRICS:
                problems.append(f"{where}: unknown metric {m!r}")
        for w, m, c in product(weightings, metrics, corrections):
            if w in ("tf", "tfidf") and m in wordfreq.METRICS:
                specs.append(MeasureSpec(
                    measure_id=f"wf-{w}-{m}{SUFFIX[c]}", family=family,
                    correction=c, orientation=1 if m == "cos" else -1,
                    params={"weighting": w, "metric": m}))
    elif family == "stylometry":
        metrics = _aslist(block.get("metric", list(stylometry.METRICS)))
        sizes = _aslist(block.get("n_words", list(stylometry.MFW_SIZES)))
        for m in metrics:
            if m not in stylometry.METRICS:
                problems.append(f"{where}: unknown metric {m!r}")
        for n in sizes:
            if not isinstance(n, int) or n < 2:
                problems.append(f"{where}: n_words must be an integer >= 2, got {n!r}")
        for m, n, c in product(metrics, sizes, corrections):
            if m in stylometry.METRICS and isinstance(n, int) and n >= 2:
                specs.append(MeasureSpec(
                    measure_id=f"styl-{m}_N{n}{SUFFIX[c]}", family=family,
                    correction=c, orientation=-1,
                    params={"metric": m, "n_words": n}))
    elif family == "embedding":
        models = _aslist(block.get("model", []))
        metrics = _aslist(block.get("metric", list(EMB_METRICS)))
        if not models:
            problems.append(f"{where}: embedding block needs a model")
        for name in models:
            if name not in cfg.models:
                problems.append(f"{where}: model {name!r} has no [models.{name}] entry")
        for m in metrics:
            if m not in EMB_METRICS:
                problems.append(f"{where}: unknown metric {m!r}")
        for name, m, c in product(models, metrics, corrections):
            if name in cfg.models and m in EMB_METRICS:
                specs.append(MeasureSpec(
                    measure_id=f"emb-{name}-{m}{SUFFIX[c]}", family=family,
                    correction=c, orientation=1 if m == "cos" else -1,
                    params={"model": name, "metric": m}))
    else:  # contextual
        index_path = block.get("index")
        if not index_path:
            problems.append(f"{where}: contextual block needs an index path")
            return specs
        name = block.get("name", Path(str(index_path)).stem)
        unit = block.get("unit", "token")
        if unit not in ("token", "sentence"):
            problems.append(f"{where}: unknown unit {unit!r}")
        poolings = _aslist(block.get("pooling", list(POOLINGS)))
        for p in poolings:
            if p not in POOLINGS:
                problems.append(f"{where}: unknown pooling {p!r}")
        for c in corrections:
            if c == "sampling":
                problems.append(
                    f"{where}: sampling does not apply to imported matrices")
            elif c == "summarization" and unit != "sentence":
                problems.append(
                    f"{where}: summarization needs unit=\"sentence\" matrices")
        for p, c in product(poolings, corrections):
            if p in POOLINGS and c != "sampling" and not (
                    c == "summarization" and unit != "sentence"):
                specs.append(MeasureSpec(
                    measure_id=f"ctx-{name}-{p}{SUFFIX[c]}", family=family,
                    correction=c, orientation=1,
                    params={"index": str(index_path), "name": name,
                            "unit": unit, "pooling": p}))
    return specs


def validate_config(cfg: RunConfig) -> list[MeasureSpec]:
    """Cross-check the whole configuration; returns the expanded measures.

    Raises ConfigError carrying every problem found: unknown families or
    grid values, missing files, duplicate measure ids, bad model references.
    """
    problems: list[str] = []
    base = cfg.config_path.parent

    def need_file(p: Path | None, what: str) -> None:
        if p is not None and not p.is_file():
            problems.append(f"{what} not found: {p}")

    need_file(cfg.manifest, "corpus manifest")
    need_file(cfg.lemmas, "lemma table")
    need_file(cfg.stopwords, "stop word list")
    if cfg.jobs < 1:
        problems.append("run.jobs must be >= 1")
    if not 0.0 <= cfg.threshold <= 1.0:
        problems.append("run.clustering_threshold must be in [0, 1]")
    if cfg.n_samples < 2:
        problems.append("sampling.n_samples must be >= 2")

    for name, entry in cfg.models.items():
        if "path" not in entry:
            problems.append(f"[models.{name}] needs a path")
        else:
            need_file(_resolve(base, entry["path"]), f"model {name!r}")
        if entry.get("format") not in ("word2vec-text", "glove-text"):
            problems.append(
                f"[models.{name}] format must be word2vec-text or glove-text")

    if not cfg.measures:
        problems.append("no [[measures]] blocks configured")

    specs: list[MeasureSpec] = []
    for i, block in enumerate(cfg.measures):
        specs.extend(_expand_block(block, i, cfg, problems))
    if cfg.measures and not specs and not problems:
        problems.append("measure grid expanded to nothing")

    seen: set[str] = set()
    for spec in specs:
        if spec.measure_id in seen:
            problems.append(f"duplicate measure id {spec.measure_id!r}")
        seen.add(spec.measure_id)
        if spec.family == "contextual":
            need_file(_resolve(base, spec.params["index"]),
                      f"contextual index for {spec.measure_id!r}")

    bench = cfg.benchmarks
    for key in ("survey", "returns", "candidacies", "coalitions"):
        if key in bench:
            need_file(_resolve(base, bench[key]), f"benchmarks.{key}")
    if "candidacies" in bench and not bench.get("elections"):
        problems.append("benchmarks.candidacies needs benchmarks.elections "
                        "(chronological election ids)")
    for election, files in bench.get("votes", {}).items():
        for side in ("backward", "forward"):
            if side in files:
                need_file(_resolve(base, files[side]),
                          f"benchmarks.votes.{election}.{side}")
    if "coalition_terms" in bench and "coalitions" not in bench:
        problems.append("benchmarks.coalition_terms needs benchmarks.coalitions")

    if problems:
        raise ConfigError(problems)
    return specs
