"""Corpus ingestion and preprocessing.

Turns raw program texts into case-normalized, lemmatized, stop-word-filtered
token streams with sentence segmentation.  Lemmatization is table-driven
(surface -> lemma TSV) and sentence segmentation is rule-based, so the whole
pipeline is deterministic and language-agnostic.
"""

from __future__ import annotations

import csv
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestError, ParseError, ValidationError

MANIFEST_HEADER = ["doc_id", "party_id", "election_id", "path"]


@dataclass(frozen=True)
class Document:
    """One program text: the unit of comparison."""

    doc_id: str
    party_id: str
    election_id: str
    raw_text: str

    @property
    def char_length(self) -> int:
        return len(self.raw_text)


@dataclass
class TokenStream:
    """Preprocessed token sequence of one document, sentence by sentence.

    Sentences that lose every token to filtering stay in place as empty
    lists, so sentence indices always line up with the raw segmentation.
    """

    doc_id: str
    sentences: list[list[str]]
    token_count: int = field(init=False)

    def __post_init__(self):
        self.token_count = sum(len(s) for s in self.sentences)

    def flat_tokens(self) -> list[str]:
        return [t for sent in self.sentences for t in sent]


@dataclass
class LemmaTable:
    """Surface form -> lemma map; unknown surfaces either kept or dropped."""

    mapping: dict[str, str]
    words_not_found_policy: str = "keep-surface"   # or "drop"

    def __post_init__(self):
        if self.words_not_found_policy not in ("keep-surface", "drop"):
            raise ValidationError(
                f"unknown words_not_found_policy {self.words_not_found_policy!r}")
        for k, v in self.mapping.items():
            if not k or not v or k != k.lower() or v != v.lower():
                raise ValidationError(f"lemma table entries must be lowercase and non-empty: {k!r} -> {v!r}")

    def lemma_of(self, token: str) -> str | None:
        lemma = self.mapping.get(token)
        if lemma is not None:
            return lemma
        return token if self.words_not_found_policy == "keep-surface" else None


EMPTY_LEMMAS = LemmaTable({})


@dataclass
class Vocabulary:
    """Lexicographically sorted list of distinct lemmas plus its inverse map."""

    words: list[str]
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValidationError("vocabulary contains duplicates")

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class SegmenterConfig:
    """Rule-based segmentation: split after . ! ? followed by whitespace and
    an uppercase letter or digit, unless the preceding word is a known
    abbreviation."""

    abbreviations: frozenset[str] = frozenset()


# terminal punctuation run, optional closing quotes/brackets, whitespace
_BOUNDARY = re.compile(r"([.!?]+[\)\]\"'»”’]*)(\s+)")
_WORD = re.compile(r"\w+", re.UNICODE)


def segment_sentences(text: str, config: SegmenterConfig = SegmenterConfig()) -> list[str]:
    """Split raw text into sentences; whitespace-only pieces are dropped."""
    cut_points = []
    for m in _BOUNDARY.finditer(text):
        nxt = m.end()
        if nxt >= len(text):
            continue
        follower = text[nxt]
        if not (follower.isupper() or follower.isdigit()):
            continue
        punct = m.group(1)
        if punct.startswith(".") and "!" not in punct and "?" not in punct:
            before = text[: m.start()]
            wm = _WORD.findall(before[-64:])
            if wm and wm[-1].lower() in config.abbreviations:
                continue
        cut_points.append((m.start() + len(punct), nxt))

    sentences = []
    start = 0
    for cut_end, next_start in cut_points:
        piece = text[start:cut_end].strip()
        if piece:
            sentences.append(piece)
        start = next_start
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def tokenize(sentence: str) -> list[str]:
    """Lowercased word tokens; tokens without a single letter are dropped."""
    out = []
    for tok in _WORD.findall(sentence):
        if any(unicodedata.category(c).startswith("L") for c in tok):
            out.append(tok.lower())
    return out


def load_corpus(manifest_path: str | Path) -> list[Document]:
    """Read a corpus manifest CSV and load every referenced text file.

    Manifest columns: doc_id,party_id,election_id,path (UTF-8, header row
    required).  Relative paths are resolved against the manifest directory.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise IngestError(f"manifest not found: {manifest_path}")
    docs: list[Document] = []
    seen: set[str] = set()
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise ParseError(f"manifest header must be {','.join(MANIFEST_HEADER)}",
                             path=str(manifest_path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError("manifest row must have 4 fields",
                                 path=str(manifest_path), line=lineno)
            doc_id, party_id, election_id, path = row
            if doc_id in seen:
                raise ValidationError(f"duplicate doc_id {doc_id!r} in manifest")
            seen.add(doc_id)
            text_path = Path(path)
            if not text_path.is_absolute():
                text_path = manifest_path.parent / text_path
            if not text_path.is_file():
                raise IngestError(f"text file not found: {text_path}")
            raw = text_path.read_text(encoding="utf-8")
            if not raw:
                raise ValidationError(f"document {doc_id!r} is empty: {text_path}")
            docs.append(Document(doc_id=doc_id, party_id=party_id,
                                 election_id=election_id, raw_text=raw))
    return docs


def preprocess(doc: Document, lemmas: LemmaTable = EMPTY_LEMMAS,
               stopwords: frozenset[str] | set[str] = frozenset(),
               segmenter_config: SegmenterConfig = SegmenterConfig()) -> TokenStream:
    """Lowercase, lemmatize, then remove stop words; keep sentence boundaries."""
    sentences = []
    for raw_sentence in segment_sentences(doc.raw_text, segmenter_config):
        toks = []
        for tok in tokenize(raw_sentence):
            lemma = lemmas.lemma_of(tok)
            if lemma is None or lemma in stopwords:
                continue
            toks.append(lemma)
        sentences.append(toks)
    return TokenStream(doc_id=doc.doc_id, sentences=sentences)


def build_vocabulary(streams: list[TokenStream]) -> Vocabulary:
    """Union of all tokens across streams, sorted lexicographically."""
    if not streams:
        raise ValidationError("build_vocabulary needs at least one stream")
    words: set[str] = set()
    for stream in streams:
        for sent in stream.sentences:
            words.update(sent)
    if not words:
        raise ValidationError("all token streams are empty")
    return Vocabulary(sorted(words))


def load_lemma_table(path: str | Path, words_not_found_policy: str = "keep-surface") -> LemmaTable:
    """Two-column TSV: surface<TAB>lemma, UTF-8; keys and values lowercased."""
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"lemma table not found: {path}")
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("lemma table rows must be surface<TAB>lemma",
                                 path=str(path), line=lineno)
            surface, lemma = parts[0].strip().lower(), parts[1].strip().lower()
            if not surface or not lemma:
                raise ParseError("empty surface or lemma", path=str(path), line=lineno)
            mapping[surface] = lemma
    return LemmaTable(mapping, words_not_found_policy)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One word per line, UTF-8; lowercased on load."""
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"stop word list not found: {path}")
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            w = line.strip().lower()
            if w:
                words.add(w)
    return frozenset(words)


def write_stream_cache(stream: TokenStream, path: str | Path) -> None:
    """One JSON file per document: {doc_id, sentences}."""
    payload = {"doc_id": stream.doc_id, "sentences": stream.sentences}
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":")),
        encoding="utf-8")


def read_stream_cache(path: str | Path) -> TokenStream:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return TokenStream(doc_id=payload["doc_id"], sentences=payload["sentences"])


def write_sentences_json(doc: Document, path: str | Path,
                         segmenter_config: SegmenterConfig = SegmenterConfig()) -> list[str]:
    """Raw (untokenized) sentence list for a document, as consumed by the
    embedding exporter; returns the sentence list that was written."""
    sentences = segment_sentences(doc.raw_text, segmenter_config)
    payload = {"doc_id": doc.doc_id, "sentences": sentences}
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":")),
        encoding="utf-8")
    return sentences
