"""Length corrections: resampling to equal size and extractive summarization.

Document length is a strong confounder for bag-of-words measures, so two
corrections are provided:

* resampling -- draw equal-sized random samples from every document (words
  i.i.d. with replacement, or whole sentences with replacement), recompute
  the measure on each resampled corpus, and average over many samples;
* summarization -- deterministically reduce each document to the sentences
  closest to their chunk's TF-IDF centroid.

Sampling is deterministic given the plan's seed: every (document, sample
index) combination gets its own `numpy` generator derived via `SeedSequence`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .corpus import TokenStream, Vocabulary, build_vocabulary
from .errors import MeasureError
from .pairtable import PairMeasureTable
from .wordfreq import build_tfidf

DEFAULT_N_SAMPLES = 256
DEFAULT_SENTENCES = 120
DEFAULT_CHUNKS = 25
DEFAULT_PER_CHUNK = 4


@dataclass(frozen=True)
class SamplingPlan:
    """What each sample draws: `mode` is "word" or "sentence"."""

    mode: str
    sample_units: int
    n_samples: int = DEFAULT_N_SAMPLES
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("word", "sentence"):
            raise MeasureError(f"unknown sampling mode {self.mode!r}")
        if self.sample_units < 1 or self.n_samples < 1:
            raise MeasureError("sample_units and n_samples must be >= 1")


@dataclass
class Summary:
    """Extractive summary: which sentences were kept, and the result.

    `chosen` pairs a 0-based chunk index with the sentence's position in the
    source stream; positions are strictly increasing.
    """

    doc_id: str
    chosen: list[tuple[int, int]]
    rendered: TokenStream


def _doc_rng(base_seed: int, doc_id: str, sample_index: int) -> np.random.Generator:
    digest = hashlib.sha256(doc_id.encode("utf-8")).digest()
    doc_word = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence((base_seed, doc_word, sample_index)))


def word_sample_size(streams: dict[str, TokenStream]) -> int:
    """Default word-sample size: the token count of the shortest document."""
    if not streams:
        raise MeasureError("empty corpus")
    sizes = {doc_id: s.token_count for doc_id, s in streams.items()}
    smallest = min(sizes, key=lambda d: (sizes[d], d))
    if sizes[smallest] == 0:
        raise MeasureError(f"document {smallest!r} has no tokens")
    return sizes[smallest]


def sample_words(stream: TokenStream, plan: SamplingPlan,
                 rng: np.random.Generator) -> TokenStream:
    """Draw sample_units tokens i.i.d. with replacement, as one pseudo-sentence."""
    tokens = stream.flat_tokens()
    if not tokens:
        raise MeasureError(f"document {stream.doc_id!r} has no tokens")
    idx = rng.integers(0, len(tokens), size=plan.sample_units)
    return TokenStream(stream.doc_id, [[tokens[i] for i in idx]])


def sample_sentences(stream: TokenStream, plan: SamplingPlan,
                     rng: np.random.Generator) -> TokenStream:
    """Draw sample_units sentences with replacement (short documents qualify
    too); output keeps the draw order, not the source order."""
    nonempty = [s for s in stream.sentences if s]
    if not nonempty:
        raise MeasureError(f"document {stream.doc_id!r} has no tokens")
    idx = rng.integers(0, len(nonempty), size=plan.sample_units)
    return TokenStream(stream.doc_id, [list(nonempty[i]) for i in idx])


def resample_stream(stream: TokenStream, plan: SamplingPlan,
                    sample_index: int) -> TokenStream:
    rng = _doc_rng(plan.rng_seed, stream.doc_id, sample_index)
    if plan.mode == "word":
        return sample_words(stream, plan, rng)
    return sample_sentences(stream, plan, rng)


def resample_corpus(streams: dict[str, TokenStream], plan: SamplingPlan,
                    sample_index: int) -> dict[str, TokenStream]:
    return {doc_id: resample_stream(s, plan, sample_index)
            for doc_id, s in sorted(streams.items())}


def averaged_measure(measure_fn, stream_a: TokenStream, stream_b: TokenStream,
                     plan: SamplingPlan) -> float:
    """Mean of a pairwise measure over independent resamplings of BOTH docs."""
    total = 0.0
    for i in range(plan.n_samples):
        total += measure_fn(resample_stream(stream_a, plan, i),
                            resample_stream(stream_b, plan, i))
    return total / plan.n_samples


def averaged_table(build_fn, streams: dict[str, TokenStream],
                   plan: SamplingPlan) -> tuple[PairMeasureTable, PairMeasureTable]:
    """Average a whole measure family over resampled corpora.

    `build_fn` maps a {doc_id: TokenStream} corpus to a PairMeasureTable; it
    is called once per sample so corpus-coupled statistics (IDF, most-
    frequent-word lists) are recomputed from each resampled corpus.  Returns
    the cell-wise mean table and a table of per-cell sample standard
    deviations (ddof=1).
    """
    tables = [build_fn(resample_corpus(streams, plan, i))
              for i in range(plan.n_samples)]
    first = tables[0]
    mean = PairMeasureTable.for_docs(sorted(streams), list(first.measures))
    spread = PairMeasureTable.for_docs(sorted(streams), list(first.measures))
    for a, b in mean.pairs:
        for m in first.measures:
            vals = np.array([t.get(a, b, m) for t in tables])
            mean.set(a, b, m, float(np.mean(vals)))
            spread.set(a, b, m, float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0)
    return mean, spread


def _chunk_bounds(n: int, k: int) -> list[tuple[int, int]]:
    """Split range(n) into k contiguous chunks with sizes differing by <= 1."""
    k = min(k, n)
    return [(i * n // k, (i + 1) * n // k) for i in range(k)]


def _centroid_cosines(sentences: list[list[str]], freq_builder) -> np.ndarray:
    """Cosine of each sentence's TF-IDF row against the chunk centroid.

    The centroid is the mean of the (unit-normalized) sentence rows; rows
    that are all zero score 0 against everything.
    """
    streams = [TokenStream(f"s{i}", [list(s)]) for i, s in enumerate(sentences)]
    vocab: Vocabulary = build_vocabulary(streams)
    rows = freq_builder(streams, vocab).values
    centroid = rows.mean(axis=0)
    norm_c = np.linalg.norm(centroid)
    norms = np.linalg.norm(rows, axis=1)
    cosines = np.zeros(len(sentences))
    if norm_c > 0.0:
        ok = norms > 0.0
        cosines[ok] = (rows[ok] @ centroid) / (norms[ok] * norm_c)
    return cosines


def summarize(stream: TokenStream, freq_builder=build_tfidf,
              n_chunks: int = DEFAULT_CHUNKS,
              per_chunk: int = DEFAULT_PER_CHUNK) -> Summary:
    """Deterministic extractive summary: per chunk, the sentences whose
    TF-IDF vectors sit closest to the chunk centroid.

    The document's (non-empty) sentences are split into `n_chunks` contiguous
    chunks of near-equal size; inside each chunk the sentences become the
    documents of a small TF-IDF matrix (document frequencies counted within
    the chunk), and the `per_chunk` sentences with the highest cosine to the
    chunk's mean vector are kept, earlier sentence winning ties.  Chunks with
    at most `per_chunk` sentences are kept whole.  Output order follows the
    source.
    """
    positions = [i for i, s in enumerate(stream.sentences) if s]
    if not positions:
        raise MeasureError(f"document {stream.doc_id!r} has no tokens")
    chosen: list[tuple[int, int]] = []
    for chunk_idx, (lo, hi) in enumerate(_chunk_bounds(len(positions), n_chunks)):
        chunk_positions = positions[lo:hi]
        if len(chunk_positions) <= per_chunk:
            chosen.extend((chunk_idx, p) for p in chunk_positions)
            continue
        cosines = _centroid_cosines([stream.sentences[p] for p in chunk_positions],
                                    freq_builder)
        ranked = sorted(range(len(chunk_positions)), key=lambda i: (-cosines[i], i))
        chosen.extend(sorted((chunk_idx, chunk_positions[i])
                             for i in ranked[:per_chunk]))
    rendered = TokenStream(stream.doc_id,
                           [list(stream.sentences[p]) for _, p in chosen])
    return Summary(doc_id=stream.doc_id, chosen=chosen, rendered=rendered)


def summarize_corpus(streams: dict[str, TokenStream],
                     n_chunks: int = DEFAULT_CHUNKS,
                     per_chunk: int = DEFAULT_PER_CHUNK) -> dict[str, TokenStream]:
    return {doc_id: summarize(s, n_chunks=n_chunks, per_chunk=per_chunk).rendered
            for doc_id, s in streams.items()}
