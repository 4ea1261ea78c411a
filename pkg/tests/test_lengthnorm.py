"""Length corrections: word/sentence resampling and extractive summarization."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_stream
from progsim.corpus import TokenStream, build_vocabulary
from progsim.errors import MeasureError
from progsim.lengthnorm import (
    SamplingPlan,
    averaged_measure,
    averaged_table,
    resample_corpus,
    resample_stream,
    sample_sentences,
    sample_words,
    summarize,
    summarize_corpus,
    word_sample_size,
    _chunk_bounds,
    _doc_rng,
)
from progsim.wordfreq import build_tf


# --- plans and sizes --------------------------------------------------------

def test_plan_validation():
    with pytest.raises(MeasureError):
        SamplingPlan("token", 10)
    with pytest.raises(MeasureError):
        SamplingPlan("word", 0)
    with pytest.raises(MeasureError):
        SamplingPlan("word", 10, n_samples=0)


def test_word_sample_size_is_shortest_doc():
    streams = {
        "long": make_stream("long", [["a"] * 50]),
        "short": make_stream("short", [["b"] * 7]),
        "mid": make_stream("mid", [["c"] * 20]),
    }
    assert word_sample_size(streams) == 7


def test_word_sample_size_rejects_empty_doc():
    with pytest.raises(MeasureError):
        word_sample_size({"x": make_stream("x", [[]])})


# --- word sampling ----------------------------------------------------------

def test_sample_words_with_replacement_can_exceed_source():
    stream = make_stream("d", [["alpha", "beta"]])
    plan = SamplingPlan("word", 50, rng_seed=3)
    out = sample_words(stream, plan, _doc_rng(3, "d", 0))
    assert out.token_count == 50
    assert len(out.sentences) == 1
    assert set(out.flat_tokens()) <= {"alpha", "beta"}


def test_sample_words_same_size_differs_from_source():
    # with-replacement draws of the full document size almost surely repeat
    # some token, so the sample is not a permutation of the source
    tokens = [f"w{i}" for i in range(40)]
    stream = make_stream("d", [tokens])
    plan = SamplingPlan("word", 40, rng_seed=11)
    out = sample_words(stream, plan, _doc_rng(11, "d", 0))
    assert sorted(out.flat_tokens()) != sorted(tokens)


def test_sample_words_deterministic_per_doc_and_index():
    stream = make_stream("d", [[f"w{i}" for i in range(30)]])
    plan = SamplingPlan("word", 15, rng_seed=5)
    one = resample_stream(stream, plan, 2)
    two = resample_stream(stream, plan, 2)
    other_index = resample_stream(stream, plan, 3)
    assert one.flat_tokens() == two.flat_tokens()
    assert one.flat_tokens() != other_index.flat_tokens()


def test_resampling_keyed_by_doc_id_not_corpus():
    """A document draws the same sample no matter what else is in the corpus."""
    stream = make_stream("d", [[f"w{i}" for i in range(30)]])
    other = make_stream("z", [[f"v{i}" for i in range(30)]])
    plan = SamplingPlan("word", 10, rng_seed=9)
    alone = resample_corpus({"d": stream}, plan, 0)["d"]
    together = resample_corpus({"d": stream, "z": other}, plan, 0)["d"]
    assert alone.flat_tokens() == together.flat_tokens()


# --- sentence sampling ------------------------------------------------------

def test_sample_sentences_with_replacement():
    stream = make_stream("d", [["a", "b"], [], ["c"], ["d", "e", "f"]])
    plan = SamplingPlan("sentence", 120, rng_seed=1)
    out = sample_sentences(stream, plan, _doc_rng(1, "d", 0))
    assert len(out.sentences) == 120
    source = {("a", "b"), ("c",), ("d", "e", "f")}
    assert {tuple(s) for s in out.sentences} <= source
    # with 120 draws from 3 sentences every sentence shows up
    assert {tuple(s) for s in out.sentences} == source


def test_sample_sentences_skips_empty_sentences():
    stream = make_stream("d", [[], ["only", "one"], []])
    plan = SamplingPlan("sentence", 5, rng_seed=1)
    out = sample_sentences(stream, plan, _doc_rng(1, "d", 0))
    assert all(s == ["only", "one"] for s in out.sentences)


def test_sample_sentences_requires_content():
    with pytest.raises(MeasureError):
        sample_sentences(make_stream("d", [[], []]),
                         SamplingPlan("sentence", 3), _doc_rng(0, "d", 0))


# --- averaging --------------------------------------------------------------

def test_averaged_measure_is_mean_of_replicates():
    a = make_stream("a", [[f"w{i}" for i in range(20)]])
    b = make_stream("b", [[f"w{i}" for i in range(10, 30)]])
    plan = SamplingPlan("word", 12, n_samples=5, rng_seed=4)

    def overlap(sa: TokenStream, sb: TokenStream) -> float:
        return len(set(sa.flat_tokens()) & set(sb.flat_tokens()))

    expect = np.mean([overlap(resample_stream(a, plan, i),
                              resample_stream(b, plan, i))
                      for i in range(5)])
    assert averaged_measure(overlap, a, b, plan) == pytest.approx(expect)


def test_averaged_table_recomputes_family_per_sample():
    streams = {
        "a": make_stream("a", [["tax", "wage", "tax", "school"] * 5]),
        "b": make_stream("b", [["market", "tax", "market", "job"] * 5]),
        "c": make_stream("c", [["wage", "school", "wage", "job"] * 5]),
    }
    plan = SamplingPlan("word", 10, n_samples=6, rng_seed=2)

    def build(corpus):
        ordered = [corpus[d] for d in sorted(corpus)]
        vocab = build_vocabulary(ordered)
        from progsim.wordfreq import pairwise_measure
        return pairwise_measure(build_tf(ordered, vocab), "cos")

    mean, spread = averaged_table(build, streams, plan)
    expect = np.mean([build(resample_corpus(streams, plan, i)).get("a", "b", "wf-tf-cos")
                      for i in range(6)])
    assert mean.get("a", "b", "wf-tf-cos") == pytest.approx(expect)
    assert spread.get("a", "b", "wf-tf-cos") >= 0.0
    assert mean.pairs == [("a", "b"), ("a", "c"), ("b", "c")]


# --- summarization ----------------------------------------------------------

def test_chunk_bounds_balanced():
    for n in (7, 25, 100, 199, 200, 201):
        bounds = _chunk_bounds(n, 25)
        sizes = [hi - lo for lo, hi in bounds]
        assert sum(sizes) == n
        assert max(sizes) - min(sizes) <= 1
        assert bounds[0][0] == 0 and bounds[-1][1] == n


def test_chunk_bounds_fewer_items_than_chunks():
    bounds = _chunk_bounds(3, 25)
    assert len(bounds) == 3
    assert [hi - lo for lo, hi in bounds] == [1, 1, 1]


def test_summarize_keeps_repeated_sentence_over_outlier():
    # five copies of one sentence and a single distinct one: the repeated
    # sentence hugs the chunk centroid, so all four kept slots go to it
    s = ["budget", "discipline", "matters"]
    t = ["whales", "sing", "loudly"]
    stream = make_stream("d", [list(s), list(s), list(t), list(s), list(s), list(s)])
    summary = summarize(stream, n_chunks=1, per_chunk=4)
    assert len(summary.chosen) == 4
    kept = [stream.sentences[p] for _, p in summary.chosen]
    assert all(k == s for k in kept)


def test_summarize_small_chunks_kept_whole():
    stream = make_stream("d", [[f"w{i}"] for i in range(10)])
    summary = summarize(stream, n_chunks=25, per_chunk=4)
    assert [p for _, p in summary.chosen] == list(range(10))
    assert summary.rendered.sentences == stream.sentences


def test_summarize_200_to_100_sentences():
    rng = np.random.default_rng(8)
    words = [f"w{i}" for i in range(40)]
    sentences = [[words[int(k)] for k in rng.integers(0, 40, size=6)]
                 for _ in range(200)]
    stream = make_stream("d", sentences)
    summary = summarize(stream, n_chunks=25, per_chunk=4)
    assert len(summary.chosen) == 100
    assert len(summary.rendered.sentences) == 100
    # positions strictly increasing => source order preserved
    positions = [p for _, p in summary.chosen]
    assert positions == sorted(positions)
    chunk_ids = [c for c, _ in summary.chosen]
    assert chunk_ids == sorted(chunk_ids)
    assert len(set(chunk_ids)) == 25


def test_summarize_skips_empty_sentences():
    stream = make_stream("d", [["alpha", "beta"], [], ["gamma", "delta"]])
    summary = summarize(stream, n_chunks=1, per_chunk=4)
    assert [p for _, p in summary.chosen] == [0, 2]


def test_summarize_deterministic():
    rng = np.random.default_rng(13)
    sentences = [[f"w{int(k)}" for k in rng.integers(0, 30, size=5)]
                 for _ in range(60)]
    stream = make_stream("d", sentences)
    one = summarize(stream)
    two = summarize(stream)
    assert one.chosen == two.chosen


def test_summarize_corpus_renders_all_docs():
    streams = {
        "a": make_stream("a", [[f"w{i}", "x"] for i in range(30)]),
        "b": make_stream("b", [[f"v{i}", "y"] for i in range(8)]),
    }
    out = summarize_corpus(streams, n_chunks=5, per_chunk=2)
    assert set(out) == {"a", "b"}
    assert len(out["a"].sentences) == 10
    assert len(out["b"].sentences) == 8  # shorter than 5*2, kept whole
