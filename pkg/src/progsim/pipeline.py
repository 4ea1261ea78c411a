"""Batch orchestration: ingest, cached measure grid, benchmarks, reports.

Measures split into two caching classes:

* pair-local -- the value depends only on the two documents (plus static
  model files): TF measures, static-embedding measures, imported contextual
  measures, under every length correction.  Cached per pair; touching one
  document invalidates only that document's pairs.
* corpus-coupled -- the value depends on the whole corpus (IDF, most-
  frequent-word lists, z-scores): TF-IDF and stylometric measures.  Cached
  per pair too, but any cache miss recomputes the whole family, since the
  family's statistics must be rebuilt anyway.

Cache entries key on content digests (documents, preprocessing inputs, model
files, measure parameters, seed), so reruns with identical inputs do zero
measure work and byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analysis, benchmarks, embeddings, stylometry, wordfreq
from .config import MeasureSpec, RunConfig
from .corpus import (
    Document,
    EMPTY_LEMMAS,
    SegmenterConfig,
    TokenStream,
    build_vocabulary,
    load_corpus,
    load_lemma_table,
    load_stopwords,
    preprocess,
    write_sentences_json,
)
from .errors import MeasureError, ProgsimError
from .lengthnorm import (
    SamplingPlan,
    averaged_measure,
    averaged_table,
    summarize,
    word_sample_size,
)
from .pairtable import PairMeasureTable

logger = logging.getLogger("progsim")

CRASH_ENV = "PROGSIM_CRASH_AFTER"

BENCHMARK_IDS = ("lrgen", "lreco", "galtan", "ch2d", "vdem", "marpor", "rile",
                 "vote-kappa", "coal", "cand-gen", "elec-cor")
BENCHMARK_ORIENT = {
    "lrgen": -1, "lreco": -1, "galtan": -1, "ch2d": -1, "vdem": -1,
    "marpor": 1, "rile": -1, "vote-kappa": 1, "coal": 1, "cand-gen": 1,
    "elec-cor": 1,
}


def _sha(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# ingestion


@dataclass
class CorpusBundle:
    documents: dict[str, Document]
    streams: dict[str, TokenStream]        # lemmatized, stop words removed
    styl_streams: dict[str, TokenStream]   # stop words retained
    doc_digests: dict[str, str]
    corpus_digest: str
    prep_digest: str
    segmenter: SegmenterConfig


def ingest(cfg: RunConfig) -> CorpusBundle:
    """Load the corpus and build both token-stream variants."""
    documents = {d.doc_id: d for d in load_corpus(cfg.manifest)}
    lemmas = (load_lemma_table(cfg.lemmas, cfg.lemma_policy)
              if cfg.lemmas else EMPTY_LEMMAS)
    stop = load_stopwords(cfg.stopwords) if cfg.stopwords else frozenset()
    seg = SegmenterConfig(frozenset(a.lower() for a in cfg.abbreviations))
    streams = {}
    styl_streams = {}
    for doc_id in sorted(documents):
        doc = documents[doc_id]
        streams[doc_id] = preprocess(doc, lemmas, stop, seg)
        styl_streams[doc_id] = preprocess(doc, lemmas, frozenset(), seg)
    doc_digests = {d: _sha(documents[d].raw_text) for d in documents}
    corpus_digest = _sha(*(f"{d}:{doc_digests[d]}" for d in sorted(doc_digests)))
    prep_digest = _sha(
        json.dumps(sorted(lemmas.mapping.items())), lemmas.words_not_found_policy,
        json.dumps(sorted(stop)), json.dumps(sorted(seg.abbreviations)))
    logger.info("ingested %d documents (%d tokens)", len(documents),
                sum(s.token_count for s in streams.values()))
    return CorpusBundle(documents, streams, styl_streams, doc_digests,
                        corpus_digest, prep_digest, seg)


# ---------------------------------------------------------------------------
# cache


class MeasureCache:
    """One JSON file per measure id, holding {pair key -> value/reason}.

    Writes are atomic (temp file + rename).  The PROGSIM_CRASH_AFTER
    environment variable, when set to an integer n, hard-exits the process
    right after the n-th committed store — a hook for crash-recovery tests.
    """

    def __init__(self, cache_dir: Path):
        self.dir = cache_dir
        self._commits = 0
        self._crash_after = int(os.environ.get(CRASH_ENV, "0") or "0")

    def _path(self, measure_id: str) -> Path:
        return self.dir / f"{measure_id}.json"

    def load(self, measure_id: str) -> dict[str, dict]:
        path = self._path(measure_id)
        if not path.is_file():
            return {}
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError):
            logger.warning("unreadable cache file %s; ignoring", path)
            return {}

    def store(self, measure_id: str, entries: dict[str, dict]) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self._path(measure_id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(entries, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)
        self._commits += 1
        if self._crash_after and self._commits >= self._crash_after:
            logger.error("crash injection: exiting after %d commits", self._commits)
            os._exit(3)

    def clear(self) -> int:
        if not self.dir.is_dir():
            return 0
        n = 0
        for p in sorted(self.dir.glob("*.json")):
            p.unlink()
            n += 1
        return n


# ---------------------------------------------------------------------------
# measure computation


PAIR_LOCAL_FAMILIES = {"contextual", "embedding"}  # plus wordfreq tf, see below


def _is_pair_local(spec: MeasureSpec) -> bool:
    if spec.family in PAIR_LOCAL_FAMILIES:
        return True
    return spec.family == "wordfreq" and spec.params["weighting"] == "tf"


@dataclass
class _Resources:
    """Lazily built shared state for one run."""

    cfg: RunConfig
    bundle: CorpusBundle
    models: dict[str, embeddings.EmbeddingTable] = field(default_factory=dict)
    model_digests: dict[str, str] = field(default_factory=dict)
    summaries: dict[str, dict[str, TokenStream]] = field(default_factory=dict)
    summary_chosen: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    ctx_matrices: dict[str, dict[str, embeddings.DocEmbeddingMatrix]] = field(default_factory=dict)
    ctx_digests: dict[str, dict[str, str]] = field(default_factory=dict)

    def model(self, name: str) -> embeddings.EmbeddingTable:
        if name not in self.models:
            entry = self.cfg.models[name]
            path = self._resolve(entry["path"])
            table = embeddings.load_embeddings(path, entry["format"])
            table.name = name
            self.models[name] = table
            self.model_digests[name] = _file_digest(path)
        return self.models[name]

    def _resolve(self, value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.cfg.config_path.parent / p

    def summarized(self, variant: str) -> dict[str, TokenStream]:
        """Cached summaries of one stream variant ("std" or "styl")."""
        if variant not in self.summaries:
            source = self.bundle.streams if variant == "std" else self.bundle.styl_streams
            out = {}
            for doc_id, stream in source.items():
                summary = summarize(stream, n_chunks=self.cfg.summary_chunks,
                                    per_chunk=self.cfg.summary_per_chunk)
                out[doc_id] = summary.rendered
                if variant == "std":
                    self.summary_chosen[doc_id] = summary.chosen
            self.summaries[variant] = out
        return self.summaries[variant]

    def contextual(self, index: str, unit: str
                   ) -> tuple[dict[str, embeddings.DocEmbeddingMatrix], dict[str, str]]:
        key = f"{index}\x00{unit}"
        if key not in self.ctx_matrices:
            index_path = self._resolve(index)
            matrices = embeddings.read_psem_index(index_path, unit)
            digests = {}
            with open(index_path, newline="", encoding="utf-8") as fh:
                import csv as _csv
                reader = _csv.reader(fh)
                next(reader)
                for doc_id, _producer, rel in reader:
                    p = Path(rel)
                    if not p.is_absolute():
                        p = index_path.parent / p
                    digests[doc_id] = _file_digest(p)
            self.ctx_matrices[key] = matrices
            self.ctx_digests[key] = digests
        return self.ctx_matrices[key], self.ctx_digests[key]

    def sampling_plan(self, spec: MeasureSpec) -> SamplingPlan:
        """Stylometry resamples words; everything else resamples sentences."""
        cfg = self.cfg
        if spec.family == "stylometry":
            units = cfg.word_sample_size or word_sample_size(self.bundle.styl_streams)
            return SamplingPlan("word", units, cfg.n_samples, cfg.seed)
        return SamplingPlan("sentence", cfg.sentence_sample_size, cfg.n_samples,
                            cfg.seed)


def _two_doc_tf_value(sa: TokenStream, sb: TokenStream, metric: str) -> float:
    """TF measure over just two documents; padding columns change nothing."""
    vocab = build_vocabulary([sa, sb])
    matrix = wordfreq.build_tf([sa, sb], vocab)
    if metric == "l1":
        return float(np.abs(matrix.values[0] - matrix.values[1]).sum())
    if metric == "l2":
        return float(np.linalg.norm(matrix.values[0] - matrix.values[1]))
    na, nb = np.linalg.norm(matrix.values[0]), np.linalg.norm(matrix.values[1])
    return float(matrix.values[0] @ matrix.values[1] / (na * nb))


def _spec_context(spec: MeasureSpec, res: _Resources) -> str:
    """Everything besides the two documents that the value depends on."""
    cfg = res.cfg
    parts = [spec.measure_id, res.bundle.prep_digest]
    if spec.correction == "sampling":
        plan = res.sampling_plan(spec)
        parts += [plan.mode, str(plan.sample_units), str(plan.n_samples),
                  str(plan.rng_seed)]
    elif spec.correction == "summarization":
        parts += [str(cfg.summary_chunks), str(cfg.summary_per_chunk)]
    if not _is_pair_local(spec):
        parts.append(res.bundle.corpus_digest)
    if spec.family == "embedding":
        res.model(spec.params["model"])
        parts.append(res.model_digests[spec.params["model"]])
    return _sha(*parts)


def _pair_key(spec: MeasureSpec, res: _Resources, context: str,
              a: str, b: str) -> str:
    if spec.family == "contextual":
        _, digests = res.contextual(spec.params["index"], spec.params["unit"])
        da, db = digests.get(a, "absent"), digests.get(b, "absent")
    else:
        da, db = res.bundle.doc_digests[a], res.bundle.doc_digests[b]
    return _sha(context, a, da, b, db)


def _pair_local_fn(spec: MeasureSpec, res: _Resources):
    """Build fn(doc_a, doc_b) -> value for a pair-local measure."""
    cfg = res.cfg

    if spec.family == "contextual":
        matrices, _ = res.contextual(spec.params["index"], spec.params["unit"])
        pooling = spec.params["pooling"]
        pooled: dict[str, np.ndarray] = {}

        def pooled_of(d: str) -> np.ndarray:
            if d not in pooled:
                if d not in matrices:
                    raise MeasureError(f"no embedding matrix for document {d!r}")
                mat = matrices[d]
                if spec.correction == "summarization":
                    stream = res.bundle.streams[d]
                    if mat.vectors.shape[0] != len(stream.sentences):
                        raise MeasureError(
                            f"matrix rows ({mat.vectors.shape[0]}) do not match "
                            f"sentence count ({len(stream.sentences)}) for {d!r}")
                    res.summarized("std")
                    rows = [p for _, p in res.summary_chosen[d]]
                    mat = embeddings.DocEmbeddingMatrix(
                        doc_id=mat.doc_id, unit=mat.unit, producer=mat.producer,
                        vectors=mat.vectors[rows])
                pooled[d] = embeddings.pooled_vector(mat, pooling)
            return pooled[d]

        def fn(a: str, b: str) -> float:
            va, vb = pooled_of(a), pooled_of(b)
            na, nb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
            if na == 0.0 or nb == 0.0:
                raise MeasureError(f"zero-norm pooled vector ({a!r} vs {b!r})")
            return float(va @ vb) / (na * nb)

        return fn

    if spec.family == "embedding":
        table = res.model(spec.params["model"])
        metric = spec.params["metric"]

        def base(sa: TokenStream, sb: TokenStream) -> float:
            if metric == "wmd":
                return embeddings.wmd(sa, sb, table, cfg.max_oov)
            va, _ = embeddings.doc_mean_vector(sa, table, cfg.max_oov)
            vb, _ = embeddings.doc_mean_vector(sb, table, cfg.max_oov)
            na, nb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
            if na == 0.0 or nb == 0.0:
                raise MeasureError("zero-norm mean vector")
            return float(va @ vb) / (na * nb)
    else:  # wordfreq tf
        metric = spec.params["metric"]

        def base(sa: TokenStream, sb: TokenStream) -> float:
            return _two_doc_tf_value(sa, sb, metric)

    if spec.correction == "sampling":
        plan = res.sampling_plan(spec)

        def fn(a: str, b: str) -> float:
            return averaged_measure(base, res.bundle.streams[a],
                                    res.bundle.streams[b], plan)
    elif spec.correction == "summarization":
        def fn(a: str, b: str) -> float:
            summaries = res.summarized("std")
            return base(summaries[a], summaries[b])
    else:
        def fn(a: str, b: str) -> float:
            return base(res.bundle.streams[a], res.bundle.streams[b])

    return fn


def _corpus_coupled_table(spec_group: list[MeasureSpec], res: _Resources
                          ) -> PairMeasureTable:
    """Compute a whole corpus-coupled family (TF-IDF or stylometry) at once.

    The group shares family, correction, and (for stylometry) the MFW size;
    base measure ids from the builders are renamed to the specs' final ids.
    """
    head = spec_group[0]
    cfg = res.cfg

    if head.family == "wordfreq":
        metrics = [s.params["metric"] for s in spec_group]

        def build(streams: dict[str, TokenStream]) -> PairMeasureTable:
            ordered = [streams[d] for d in sorted(streams)]
            vocab = build_vocabulary(ordered)
            matrix = wordfreq.build_tfidf(ordered, vocab)
            out = wordfreq.pairwise_measure(matrix, metrics[0])
            for m in metrics[1:]:
                out.merge(wordfreq.pairwise_measure(matrix, m))
            return out

        base_ids = {s: f"wf-tfidf-{s.params['metric']}" for s in spec_group}
        source = res.bundle.streams
        variant = "std"
    else:
        n_words = head.params["n_words"]
        metrics = tuple(s.params["metric"] for s in spec_group)

        def build(streams: dict[str, TokenStream]) -> PairMeasureTable:
            return stylometry.stylometry_table(streams, n_words, metrics)

        base_ids = {s: f"styl-{s.params['metric']}_N{n_words}" for s in spec_group}
        source = res.bundle.styl_streams
        variant = "styl"

    if head.correction == "sampling":
        plan = res.sampling_plan(head)
        table, _spread = averaged_table(build, source, plan)
    elif head.correction == "summarization":
        table = build(res.summarized(variant))
    else:
        table = build(source)

    out = PairMeasureTable.for_docs(sorted(source), [s.measure_id for s in spec_group])
    for a, b in out.pairs:
        for s in spec_group:
            v = table.get(a, b, base_ids[s])
            if math.isnan(v):
                out.set_missing(a, b, s.measure_id,
                                "missing in at least one resampling replicate"
                                if head.correction == "sampling" else
                                "measure not computable for this pair")
            else:
                out.set(a, b, s.measure_id, v)
    return out


def _group_key(spec: MeasureSpec):
    if spec.family == "stylometry":
        return ("stylometry", spec.correction, spec.params["n_words"])
    return ("wf-tfidf", spec.correction)


def compute_measures(specs: list[MeasureSpec], res: _Resources,
                     cache: MeasureCache) -> tuple[PairMeasureTable, dict]:
    """Compute every configured measure, consulting and refilling the cache."""
    docs = sorted(res.bundle.documents)
    merged = PairMeasureTable.for_docs(docs, [])
    stats: dict[str, dict[str, int]] = {}
    pairs = merged.pairs

    def restore(spec: MeasureSpec, entries: dict, keys: dict) -> tuple[PairMeasureTable, int]:
        table = PairMeasureTable.for_docs(docs, [spec.measure_id])
        hits = 0
        for (a, b), key in keys.items():
            entry = entries.get(key)
            if entry is None:
                continue
            hits += 1
            if entry["value"] is None:
                table.set_missing(a, b, spec.measure_id, entry.get("reason", ""))
            else:
                table.set(a, b, spec.measure_id, entry["value"])
        return table, hits

    def entries_from(table: PairMeasureTable, spec: MeasureSpec, keys: dict) -> dict:
        entries = {}
        for (a, b), key in keys.items():
            v = table.get(a, b, spec.measure_id)
            if math.isnan(v):
                reason = table.reasons.get((a, b, spec.measure_id), "not computed")
                entries[key] = {"value": None, "reason": reason}
            else:
                entries[key] = {"value": v, "reason": None}
        return entries

    # group corpus-coupled specs so shared statistics are built once
    groups: dict[tuple, list[MeasureSpec]] = {}
    for spec in specs:
        if not _is_pair_local(spec):
            groups.setdefault(_group_key(spec), []).append(spec)

    def run_pair_local(spec: MeasureSpec) -> PairMeasureTable:
        context = _spec_context(spec, res)
        keys = {(a, b): _pair_key(spec, res, context, a, b) for a, b in pairs}
        cached = cache.load(spec.measure_id)
        table, hits = restore(spec, cached, keys)
        todo = [(a, b) for (a, b) in pairs
                if keys[(a, b)] not in cached]
        if todo:
            fn = _pair_local_fn(spec, res)
            for a, b in todo:
                try:
                    table.set(a, b, spec.measure_id, fn(a, b))
                except MeasureError as exc:
                    table.set_missing(a, b, spec.measure_id, str(exc))
            cache.store(spec.measure_id, entries_from(table, spec, keys))
        stats[spec.measure_id] = {"hits": hits, "computed": len(todo)}
        logger.info("%s: %d cached, %d computed", spec.measure_id, hits, len(todo))
        return table

    def run_group(group: list[MeasureSpec]) -> list[PairMeasureTable]:
        contexts = {s: _spec_context(s, res) for s in group}
        keys = {s: {(a, b): _pair_key(s, res, contexts[s], a, b) for a, b in pairs}
                for s in group}
        tables = {}
        complete = True
        for s in group:
            cached = cache.load(s.measure_id)
            table, hits = restore(s, cached, keys[s])
            tables[s] = table
            stats[s.measure_id] = {"hits": hits, "computed": 0}
            if hits < len(pairs):
                complete = False
        if not complete:
            try:
                fresh = _corpus_coupled_table(group, res)
            except ProgsimError as exc:
                fresh = PairMeasureTable.for_docs(docs, [s.measure_id for s in group])
                for a, b in pairs:
                    for s in group:
                        fresh.set_missing(a, b, s.measure_id, str(exc))
            for s in group:
                tables[s] = fresh
                stats[s.measure_id] = {"hits": 0, "computed": len(pairs)}
                cache.store(s.measure_id, entries_from(fresh, s, keys[s]))
            logger.info("group %s: recomputed %d pairs x %d measures",
                        "+".join(s.measure_id for s in group), len(pairs), len(group))
        return [tables[s] for s in group]

    with ThreadPoolExecutor(max_workers=res.cfg.jobs) as pool:
        local_specs = [s for s in specs if _is_pair_local(s)]
        local_futures = {s: pool.submit(run_pair_local, s) for s in local_specs}
        group_futures = {k: pool.submit(run_group, g) for k, g in groups.items()}
        results: dict[str, PairMeasureTable] = {}
        for s, fut in local_futures.items():
            results[s.measure_id] = fut.result()
        for k, fut in group_futures.items():
            for s, table in zip(groups[k], fut.result()):
                results[s.measure_id] = table

    for spec in specs:  # deterministic merge order
        merged.merge(results[spec.measure_id])
    return merged, stats


# ---------------------------------------------------------------------------
# benchmarks


def compute_benchmarks(cfg: RunConfig, bundle: CorpusBundle
                       ) -> tuple[PairMeasureTable, list[str]]:
    """Benchmark columns over same-election document pairs.

    Families with no configured data are skipped entirely; configured
    families mark non-computable pairs missing with a reason.
    """
    base = cfg.config_path.parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    bench = cfg.benchmarks
    docs = sorted(bundle.documents)
    table = PairMeasureTable.for_docs(docs, [])
    active: list[str] = []

    survey = None
    if "survey" in bench:
        survey = benchmarks.load_survey(resolve(bench["survey"]),
                                        bench.get("survey_columns", {}))
        cols = bench.get("survey_columns", {})
        if "lrgen" in cols:
            active.append("lrgen")
        if "lrecon" in cols:
            active.append("lreco")
        if "galtan" in cols:
            active.append("galtan")
        if "lrecon" in cols and "galtan" in cols:
            active.append("ch2d")
        if cols.get("vdem_cols"):
            active.append("vdem")
        if cols.get("marpor_cols"):
            active.append("marpor")
        if "rile" in cols:
            active.append("rile")

    votes_cfg = bench.get("votes", {})
    vote_files: dict[str, list] = {}
    if votes_cfg:
        active.append("vote-kappa")
        loaded: dict[str, list] = {}

        def votes_of(path_s: str) -> list:
            if path_s not in loaded:
                loaded[path_s] = benchmarks.load_votes(resolve(path_s))
            return loaded[path_s]

        for election, files in votes_cfg.items():
            vote_files[election] = [
                votes_of(files["backward"]) if "backward" in files else None,
                votes_of(files["forward"]) if "forward" in files else None,
            ]

    coalition_terms = bench.get("coalition_terms", {})
    timelines: dict[str, benchmarks.CoalitionTimeline] = {}
    if "coalitions" in bench and coalition_terms:
        timelines = benchmarks.load_coalitions(resolve(bench["coalitions"]))
        active.append("coal")

    genealogy = None
    if "candidacies" in bench:
        records = benchmarks.load_candidacies(resolve(bench["candidacies"]))
        genealogy = benchmarks.build_genealogy(
            records, list(bench.get("elections", [])),
            dict(bench.get("electoral_systems", {})))
        active.append("cand-gen")

    returns = {}
    if "returns" in bench:
        returns = benchmarks.load_returns(resolve(bench["returns"]))
        active.append("elec-cor")

    if not active:
        return table, active

    def put(a: str, b: str, mid: str, value: float | None, reason: str) -> None:
        if value is None:
            table.set_missing(a, b, mid, reason)
        else:
            table.set(a, b, mid, value)

    for i, a in enumerate(docs):
        for b in docs[i + 1:]:
            da, db = bundle.documents[a], bundle.documents[b]
            if da.election_id != db.election_id:
                for mid in active:
                    table.set_missing(a, b, mid,
                                      "parties did not contest the same election")
                continue
            election = da.election_id
            px, py = da.party_id, db.party_id
            if survey is not None:
                ra = survey.get((px, election))
                rb = survey.get((py, election))
                for mid, which in (("lrgen", "lrgen"), ("lreco", "lreco"),
                                   ("galtan", "galtan"), ("ch2d", "ch2d"),
                                   ("vdem", "vdem")):
                    if mid not in active:
                        continue
                    if ra is None or rb is None:
                        put(a, b, mid, None, "party missing from survey table")
                    else:
                        put(a, b, mid, benchmarks.survey_distance(ra, rb, which),
                            "survey field missing")
                if "marpor" in active or "rile" in active:
                    if ra is None or rb is None:
                        topic, rile = None, None
                    else:
                        topic, rile = benchmarks.marpor_measures(ra, rb)
                    if "marpor" in active:
                        put(a, b, "marpor", topic, "topic vector missing or zero")
                    if "rile" in active:
                        put(a, b, "rile", rile, "rile value missing")
            if "vote-kappa" in active:
                back, fwd = vote_files.get(election, [None, None])
                if back is None and fwd is None:
                    put(a, b, "vote-kappa", None, "no vote data for this election")
                else:
                    put(a, b, "vote-kappa",
                        benchmarks.vote_kappa(back, fwd, px, py),
                        "no common votes in either adjacent term")
            if "coal" in active:
                terms = coalition_terms.get(election, {})
                tls = [timelines[t] for t in (terms.get("backward"), terms.get("forward"))
                       if t is not None and t in timelines]
                put(a, b, "coal",
                    benchmarks.coalition_similarity(tls, px, py) if tls else None,
                    "no common parliamentary days in either adjacent term")
            if "cand-gen" in active:
                va, vb = (px, election), (py, election)
                if va in genealogy.ancestors and vb in genealogy.ancestors:
                    put(a, b, "cand-gen",
                        benchmarks.genealogical_similarity(genealogy, va, vb), "")
                else:
                    put(a, b, "cand-gen", None, "party has no candidacy records")
            if "elec-cor" in active:
                ret = returns.get(election)
                put(a, b, "elec-cor",
                    benchmarks.electoral_similarity(ret, px, py) if ret else None,
                    "too few shared municipalities or no variance")
    return table, active


# ---------------------------------------------------------------------------
# outputs


def _write_orientation(path: Path, specs: list[MeasureSpec],
                       bench_ids: list[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("measure_id,orientation,kind\n")
        for spec in sorted(specs, key=lambda s: s.measure_id):
            fh.write(f"{spec.measure_id},{spec.orientation},text\n")
        for mid in sorted(bench_ids):
            fh.write(f"{mid},{BENCHMARK_ORIENT[mid]},benchmark\n")


def read_orientation(path: Path) -> tuple[dict[str, int], dict[str, str]]:
    orientations: dict[str, int] = {}
    kinds: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "measure_id,orientation,kind":
            raise MeasureError(f"bad orientation file header: {header}")
        for line in fh:
            mid, orient, kind = line.strip().split(",")
            orientations[mid] = int(orient)
            kinds[mid] = kind
    return orientations, kinds


def _write_failures(path: Path, table: PairMeasureTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("doc_a,doc_b,measure_id,reason\n")
        for (a, b, mid), reason in sorted(table.reasons.items()):
            if math.isnan(table.get(a, b, mid)):
                safe = reason.replace('"', "'")
                fh.write(f'{a},{b},{mid},"{safe}"\n')


def _input_digests(cfg: RunConfig, bundle: CorpusBundle, res: _Resources) -> dict:
    base = cfg.config_path.parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    digests: dict = {"corpus": bundle.corpus_digest,
                     "preprocessing": bundle.prep_digest}
    digests["models"] = {name: res.model_digests.get(name) or
                         _file_digest(resolve(cfg.models[name]["path"]))
                         for name in sorted(cfg.models)}
    bench_files = {}
    for key in ("survey", "returns", "candidacies", "coalitions"):
        if key in cfg.benchmarks:
            bench_files[key] = _file_digest(resolve(cfg.benchmarks[key]))
    for election, files in cfg.benchmarks.get("votes", {}).items():
        for side, path_s in files.items():
            bench_files[f"votes.{election}.{side}"] = _file_digest(resolve(path_s))
    digests["benchmarks"] = bench_files
    return digests


def run(cfg: RunConfig, specs: list[MeasureSpec]) -> dict:
    """Execute the full grid and write the output tree; returns cache stats."""
    bundle = ingest(cfg)
    res = _Resources(cfg, bundle)
    cache = MeasureCache(cfg.cache_dir)
    table, stats = compute_measures(specs, res, cache)
    bench_table, bench_ids = compute_benchmarks(cfg, bundle)
    table.merge(bench_table)

    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "measures.csv")
    _write_failures(out / "failures.csv", table)
    _write_orientation(out / "orientation.csv", specs, bench_ids)
    manifest = {
        "version": __version__,
        "seed": cfg.seed,
        "measures": sorted(s.measure_id for s in specs) + sorted(bench_ids),
        "inputs": _input_digests(cfg, bundle, res),
        "sampling": {"n_samples": cfg.n_samples,
                     "sentence_size": cfg.sentence_sample_size,
                     "word_size": cfg.word_sample_size},
        "summarization": {"chunks": cfg.summary_chunks,
                          "per_chunk": cfg.summary_per_chunk},
    }
    (out / "run_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %s", out / "measures.csv")
    return stats


def report(cfg: RunConfig) -> None:
    """Correlations, measure clusters, and cluster-benchmark table from a
    finished run's output directory."""
    out = cfg.output
    for name in ("measures.csv", "orientation.csv"):
        if not (out / name).is_file():
            raise MeasureError(
                f"no {name} under {out}; run the measure grid first")
    table = PairMeasureTable.from_csv(out / "measures.csv")
    orientations, kinds = read_orientation(out / "orientation.csv")
    text_ids = [m for m in table.measures if kinds.get(m) == "text"]
    bench_ids = [m for m in table.measures if kinds.get(m) == "benchmark"]
    if len(text_ids) < 2:
        raise MeasureError("need at least two text measures to report on")

    names, R = analysis.correlation_matrix(table, text_ids, orientations)
    with open(out / "correlations.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("measure_id," + ",".join(names) + "\n")
        for i, name in enumerate(names):
            cells = ["" if math.isnan(R[i, j]) else repr(float(R[i, j]))
                     for j in range(len(names))]
            fh.write(name + "," + ",".join(cells) + "\n")

    tree = analysis.cluster_measures(table, cfg.threshold, text_ids, orientations)
    with open(out / "clusters.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("cluster_id,measure_id,min_intra_correlation\n")
        for k, members in enumerate(tree.clusters, start=1):
            for m in members:
                fh.write(f"C{k},{m},{tree.min_intra[k - 1]!r}\n")

    if bench_ids:
        rep = analysis.benchmark_report(table, tree.clusters, bench_ids, orientations)
        rep.to_csv(out / "cluster_benchmarks.csv")
    logger.info("wrote reports under %s", out)


def selftest(cfg: RunConfig) -> analysis.SelfSimilarityReport:
    """Odd/even-sentence self-similarity under TF cosine for long documents."""
    bundle = ingest(cfg)

    def tf_cos(sa: TokenStream, sb: TokenStream) -> float:
        return _two_doc_tf_value(sa, sb, "cos")

    rep = analysis.self_similarity_test(
        bundle.documents, bundle.streams, tf_cos, "wf-tf-cos",
        min_chars=cfg.selftest_min_chars, orientation=1)
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "measure_id": rep.measure_id,
        "min_chars": cfg.selftest_min_chars,
        "self_values": rep.self_values,
        "median_self": None if math.isnan(rep.median_self) else rep.median_self,
        "median_cross": None if math.isnan(rep.median_cross) else rep.median_cross,
        "separation": None if math.isnan(rep.separation) else rep.separation,
    }
    (out / "selftest.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return rep


def export_sentences(cfg: RunConfig, target: Path) -> int:
    """Write per-document raw sentence lists for the embedding exporter."""
    documents = {d.doc_id: d for d in load_corpus(cfg.manifest)}
    seg = SegmenterConfig(frozenset(a.lower() for a in cfg.abbreviations))
    target.mkdir(parents=True, exist_ok=True)
    for doc_id in sorted(documents):
        write_sentences_json(documents[doc_id], target / f"{doc_id}.sentences.json", seg)
    return len(documents)


def clean_cache(cfg: RunConfig) -> int:
    return MeasureCache(cfg.cache_dir).clear()
