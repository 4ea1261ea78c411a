"""Ingestion and preprocessing: segmentation, tokenization, lemmas, manifests."""

from __future__ import annotations

import json

import pytest

from progsim.corpus import (
    Document,
    EMPTY_LEMMAS,
    LemmaTable,
    SegmenterConfig,
    TokenStream,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    load_lemma_table,
    load_stopwords,
    preprocess,
    read_stream_cache,
    segment_sentences,
    tokenize,
    write_sentences_json,
    write_stream_cache,
)
from progsim.errors import IngestError, ParseError, ValidationError


# --- segmentation ---------------------------------------------------------

def test_segment_basic():
    text = "First point here. Second point there! Third?"
    assert segment_sentences(text) == [
        "First point here.", "Second point there!", "Third?"]


def test_segment_requires_upper_or_digit_follower():
    assert segment_sentences("version 2.5 applies here") == [
        "version 2.5 applies here"]
    assert segment_sentences("Stop. 42 items follow.") == [
        "Stop.", "42 items follow."]


def test_segment_abbreviation_suppressed():
    cfg = SegmenterConfig(frozenset({"dr", "st"}))
    text = "Dr. Smith spoke. St. Mary listened."
    assert segment_sentences(text, cfg) == ["Dr. Smith spoke.", "St. Mary listened."]
    # same text without the abbreviation list splits after the titles
    assert segment_sentences(text) == [
        "Dr.", "Smith spoke.", "St.", "Mary listened."]


def test_segment_abbreviation_not_suppressed_for_bang():
    cfg = SegmenterConfig(frozenset({"dr"}))
    assert segment_sentences("Call dr! Now please.", cfg) == [
        "Call dr!", "Now please."]


def test_segment_closing_quotes_stay_with_sentence():
    text = 'He said "go." Then he left.'
    assert segment_sentences(text) == ['He said "go."', "Then he left."]


def test_segment_whitespace_only_pieces_dropped():
    assert segment_sentences("  \n\t ") == []
    assert segment_sentences("One.   \n  Two.") == ["One.", "Two."]


# --- tokenization ---------------------------------------------------------

def test_tokenize_lowers_and_filters():
    assert tokenize("The Quick 2nd brown-Fox 42 jumps!") == [
        "the", "quick", "2nd", "brown", "fox", "jumps"]


def test_tokenize_pure_digits_dropped():
    assert tokenize("2024 42 7") == []


def test_tokenize_unicode_letters_kept():
    assert tokenize("Šariš über élan") == ["šariš", "über", "élan"]


# --- lemma table and stop words -------------------------------------------

def test_lemma_policy_keep_surface():
    table = LemmaTable({"wages": "wage"})
    assert table.lemma_of("wages") == "wage"
    assert table.lemma_of("unknown") == "unknown"


def test_lemma_policy_drop():
    table = LemmaTable({"wages": "wage"}, "drop")
    assert table.lemma_of("unknown") is None


def test_lemma_policy_invalid():
    with pytest.raises(ValidationError):
        LemmaTable({}, "invent")


def test_lemma_table_must_be_lowercase():
    with pytest.raises(ValidationError):
        LemmaTable({"Wages": "wage"})


def test_load_lemma_table(tmp_path):
    p = tmp_path / "lemmas.tsv"
    p.write_text("Wages\twage\n\nTaxes\ttax\n", encoding="utf-8")
    table = load_lemma_table(p)
    assert table.mapping == {"wages": "wage", "taxes": "tax"}


def test_load_lemma_table_bad_row(tmp_path):
    p = tmp_path / "lemmas.tsv"
    p.write_text("wages wage\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_lemma_table(p)
    assert err.value.line == 1


def test_load_stopwords(tmp_path):
    p = tmp_path / "stop.txt"
    p.write_text("The\nand\n\nof\n", encoding="utf-8")
    assert load_stopwords(p) == frozenset({"the", "and", "of"})


# --- preprocess -----------------------------------------------------------

def test_preprocess_applies_lemmas_then_stopwords():
    doc = Document("d", "p", "e", "The wages rose. Taxes fell.")
    lemmas = LemmaTable({"wages": "wage", "taxes": "tax"})
    stream = preprocess(doc, lemmas, frozenset({"the"}))
    assert stream.sentences == [["wage", "rose"], ["tax", "fell"]]
    assert stream.token_count == 4
    assert stream.flat_tokens() == ["wage", "rose", "tax", "fell"]


def test_preprocess_stopword_matches_lemma_not_surface():
    doc = Document("d", "p", "e", "Wages here.")
    lemmas = LemmaTable({"wages": "wage"})
    # the stop list holds the lemma, so the surface form is removed too
    stream = preprocess(doc, lemmas, frozenset({"wage"}))
    assert stream.sentences == [["here"]]


def test_preprocess_keeps_empty_sentences_in_place():
    doc = Document("d", "p", "e", "The and of. Real words here. 42 7.")
    stream = preprocess(doc, EMPTY_LEMMAS, frozenset({"the", "and", "of"}))
    assert stream.sentences == [[], ["real", "words", "here"], []]
    assert stream.token_count == 3


# --- vocabulary -----------------------------------------------------------

def test_build_vocabulary_sorted_union():
    a = TokenStream("a", [["beta", "alpha"], []])
    b = TokenStream("b", [["gamma", "alpha"]])
    vocab = build_vocabulary([a, b])
    assert vocab.words == ["alpha", "beta", "gamma"]
    assert vocab.index == {"alpha": 0, "beta": 1, "gamma": 2}
    assert len(vocab) == 3


def test_build_vocabulary_all_empty():
    with pytest.raises(ValidationError):
        build_vocabulary([TokenStream("a", [[]])])


def test_vocabulary_rejects_duplicates():
    with pytest.raises(ValidationError):
        Vocabulary(["a", "a"])


# --- manifest loading ------------------------------------------------------

def _write_corpus(tmp_path, rows):
    (tmp_path / "docs").mkdir(exist_ok=True)
    lines = ["doc_id,party_id,election_id,path"]
    for doc_id, party, election, name, text in rows:
        (tmp_path / "docs" / name).write_text(text, encoding="utf-8")
        lines.append(f"{doc_id},{party},{election},docs/{name}")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def test_load_corpus_roundtrip(tmp_path):
    manifest = _write_corpus(tmp_path, [
        ("a#e1", "a", "e1", "a.txt", "Alpha text."),
        ("b#e1", "b", "e1", "b.txt", "Beta text."),
    ])
    docs = load_corpus(manifest)
    assert [d.doc_id for d in docs] == ["a#e1", "b#e1"]
    assert docs[0].raw_text == "Alpha text."
    assert docs[0].char_length == 11
    assert docs[0].party_id == "a" and docs[0].election_id == "e1"


def test_load_corpus_missing_manifest(tmp_path):
    with pytest.raises(IngestError):
        load_corpus(tmp_path / "nope.csv")


def test_load_corpus_bad_header(tmp_path):
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("id,party,election,path\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_corpus(manifest)
    assert err.value.line == 1


def test_load_corpus_duplicate_doc_id(tmp_path):
    manifest = _write_corpus(tmp_path, [
        ("a#e1", "a", "e1", "a.txt", "Alpha."),
        ("a#e1", "a", "e1", "b.txt", "Beta."),
    ])
    with pytest.raises(ValidationError):
        load_corpus(manifest)


def test_load_corpus_missing_text_file(tmp_path):
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("doc_id,party_id,election_id,path\nx,p,e,gone.txt\n",
                        encoding="utf-8")
    with pytest.raises(IngestError):
        load_corpus(manifest)


def test_load_corpus_empty_document(tmp_path):
    manifest = _write_corpus(tmp_path, [("a#e1", "a", "e1", "a.txt", "")])
    with pytest.raises(ValidationError):
        load_corpus(manifest)


# --- caches and exports -----------------------------------------------------

def test_stream_cache_roundtrip(tmp_path):
    stream = TokenStream("d", [["alpha", "beta"], [], ["gamma"]])
    path = tmp_path / "d.json"
    write_stream_cache(stream, path)
    back = read_stream_cache(path)
    assert back.doc_id == "d"
    assert back.sentences == stream.sentences
    assert back.token_count == 3


def test_write_sentences_json(tmp_path):
    doc = Document("d", "p", "e", "One here. Two there.")
    path = tmp_path / "d.sentences.json"
    sentences = write_sentences_json(doc, path)
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload == {"doc_id": "d", "sentences": ["One here.", "Two there."]}
    assert sentences == payload["sentences"]
