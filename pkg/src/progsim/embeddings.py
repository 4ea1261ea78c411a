"""Embedding-based similarity: mean-vector cosine, word mover's distance,
and pooling over imported contextual embedding matrices.

Static tables are loaded from standard word2vec text (with a "count dim"
header) or headerless GloVe text.  WMD is the exact 1-Wasserstein distance
between two documents' relative-frequency distributions over in-vocabulary
word types, with Euclidean ground cost, solved by the transportation simplex
in `_kernels`.

Contextual embeddings are never computed here; they arrive as PSEM
interchange files (binary, little-endian: magic "PSEM", version u32, dim u32,
m u32, producer string as u16 length + UTF-8 bytes, then m*dim float32
row-major), one file per (document, producer), listed in a sidecar index CSV
`doc_id,producer,path`.
"""

from __future__ import annotations

import csv
import math
import struct
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import TRANSPORT_OK, transport_simplex
from .corpus import TokenStream
from .errors import MeasureError, ParseError, ValidationError
from .pairtable import PairMeasureTable

PSEM_MAGIC = b"PSEM"
PSEM_VERSION = 1
DEFAULT_MAX_OOV = 0.5
PSEM_INDEX_HEADER = ["doc_id", "producer", "path"]


@dataclass
class EmbeddingTable:
    """Static word vectors: one fixed-length vector per (lowercased) word."""

    name: str
    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[word]


@dataclass
class DocEmbeddingMatrix:
    """Per-document contextual embeddings, one row per token or sentence."""

    doc_id: str
    unit: str  # "token" | "sentence"
    producer: str
    vectors: np.ndarray  # m x dim float32

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1:
            raise ValidationError(f"embedding matrix for {self.doc_id!r} must have >= 1 row")
        if not np.isfinite(self.vectors).all():
            raise ValidationError(f"embedding matrix for {self.doc_id!r} contains NaN/Inf")


@dataclass
class TransportPlan:
    """An optimal transportation plan with its marginals and objective."""

    p: np.ndarray
    q: np.ndarray
    cost: np.ndarray
    plan: np.ndarray
    objective: float

    def check_feasible(self, tol: float = 1e-8) -> None:
        if (self.plan < -tol).any():
            raise MeasureError("transport plan has negative mass")
        row_err = np.abs(self.plan.sum(axis=1) - self.p).max()
        col_err = np.abs(self.plan.sum(axis=0) - self.q).max()
        if row_err > tol or col_err > tol:
            raise MeasureError(
                f"transport plan marginals off by {max(row_err, col_err):.3e}")


def load_embeddings(path: str | Path, fmt: str) -> EmbeddingTable:
    """Read a static embedding table; `fmt` is "word2vec-text" or "glove-text".

    Duplicate words keep the last occurrence (with a warning); any dimension
    mismatch or non-finite value is a ParseError carrying the line number.
    """
    if fmt not in ("word2vec-text", "glove-text"):
        raise ParseError(f"unknown embedding format {fmt!r}")
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = -1
    declared = -1
    dupes = 0
    with open(path, encoding="utf-8") as fh:
        lineno = 0
        if fmt == "word2vec-text":
            header = fh.readline()
            lineno = 1
            parts = header.split()
            if len(parts) != 2:
                raise ParseError("word2vec header must be 'count dim'", str(path), 1)
            try:
                declared, dim = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("word2vec header must be 'count dim'", str(path), 1)
        for line in fh:
            lineno += 1
            if not line.strip():
                continue
            fields = line.rstrip("\n").split(" ")
            word = fields[0]
            values = [f for f in fields[1:] if f]
            if dim == -1:
                dim = len(values)
                if dim == 0:
                    raise ParseError("first row has no vector values", str(path), lineno)
            if len(values) != dim:
                raise ParseError(
                    f"expected {dim} values, found {len(values)}", str(path), lineno)
            try:
                vec = np.array([float(v) for v in values])
            except ValueError:
                raise ParseError("non-numeric vector value", str(path), lineno)
            if not np.isfinite(vec).all():
                raise ParseError("non-finite vector value", str(path), lineno)
            if word in vectors:
                dupes += 1
            vectors[word] = vec
    if not vectors:
        raise ParseError("embedding file has no vectors", str(path))
    if declared >= 0 and len(vectors) + dupes != declared:
        raise ParseError(
            f"header declares {declared} rows, file has {len(vectors) + dupes}", str(path))
    if dupes:
        warnings.warn(f"{dupes} duplicate word(s) in {path.name}; last occurrence wins")
    return EmbeddingTable(name=path.stem, dim=dim, vectors=vectors)


def _invocab_counts(stream: TokenStream, table: EmbeddingTable,
                    max_oov: float) -> Counter:
    tokens = stream.flat_tokens()
    if not tokens:
        raise MeasureError(f"document {stream.doc_id!r} has no tokens")
    counts = Counter(t for t in tokens if t in table)
    known = sum(counts.values())
    skip_rate = 1.0 - known / len(tokens)
    if known == 0:
        raise MeasureError(
            f"document {stream.doc_id!r} has no in-vocabulary tokens")
    if skip_rate > max_oov:
        raise MeasureError(
            f"document {stream.doc_id!r} is {skip_rate:.0%} out-of-vocabulary "
            f"(threshold {max_oov:.0%})")
    return counts


def doc_mean_vector(stream: TokenStream, table: EmbeddingTable,
                    max_oov: float = DEFAULT_MAX_OOV) -> tuple[np.ndarray, float]:
    """Unweighted mean over all in-vocabulary token occurrences.

    Returns (vector, skip_rate); errors if nothing is in vocabulary or the
    out-of-vocabulary share exceeds `max_oov`.
    """
    tokens = stream.flat_tokens()
    counts = _invocab_counts(stream, table, max_oov)
    total = sum(counts.values())
    mean = np.zeros(table.dim)
    for word, c in counts.items():
        mean += c * table[word]
    return mean / total, 1.0 - total / len(tokens)


def wmd_plan(stream_a: TokenStream, stream_b: TokenStream, table: EmbeddingTable,
             max_oov: float = DEFAULT_MAX_OOV) -> TransportPlan:
    """Optimal transport plan between the two documents' type distributions."""
    ca = _invocab_counts(stream_a, table, max_oov)
    cb = _invocab_counts(stream_b, table, max_oov)
    words_a = sorted(ca)
    words_b = sorted(cb)
    p = np.array([ca[w] for w in words_a], dtype=float)
    q = np.array([cb[w] for w in words_b], dtype=float)
    p /= p.sum()
    q /= q.sum()
    va = np.stack([table[w] for w in words_a])
    vb = np.stack([table[w] for w in words_b])
    diff = va[:, None, :] - vb[None, :, :]
    cost = np.sqrt((diff * diff).sum(axis=2))
    plan, n_iter, status = transport_simplex(p, q, cost)
    if status != TRANSPORT_OK:
        raise MeasureError(
            f"transport solver did not converge after {n_iter} iterations "
            f"({stream_a.doc_id!r} vs {stream_b.doc_id!r})")
    return TransportPlan(p=p, q=q, cost=cost, plan=plan,
                         objective=float((plan * cost).sum()))


def wmd(stream_a: TokenStream, stream_b: TokenStream, table: EmbeddingTable,
        max_oov: float = DEFAULT_MAX_OOV) -> float:
    """Word mover's distance: exact 1-Wasserstein with Euclidean ground cost."""
    return wmd_plan(stream_a, stream_b, table, max_oov).objective


def pooled_vector(mat: DocEmbeddingMatrix, pooling: str) -> np.ndarray:
    """Column-wise mean or max over the matrix rows."""
    if pooling == "mean":
        return mat.vectors.mean(axis=0)
    if pooling == "max":
        return mat.vectors.max(axis=0)
    raise MeasureError(f"unknown pooling {pooling!r}")


def _cosine_sim(x: np.ndarray, y: np.ndarray, what: str) -> float:
    nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise MeasureError(f"zero-norm vector in cosine similarity ({what})")
    return float(x @ y) / (nx * ny)


def embedding_pair_measure(streams: dict[str, TokenStream], table: EmbeddingTable,
                           metric: str,
                           max_oov: float = DEFAULT_MAX_OOV) -> PairMeasureTable:
    """Pair table for one static table and one metric ("cos" or "wmd").

    measure_id is `emb-<table name>-<metric>`.  Per-document failures (all
    out-of-vocabulary, too-high skip rate) mark the affected pairs missing
    with the error message as reason rather than aborting the table.
    """
    if metric not in ("cos", "wmd"):
        raise MeasureError(f"unknown embedding metric {metric!r}")
    measure_id = f"emb-{table.name}-{metric}"
    docs = sorted(streams)
    out = PairMeasureTable.for_docs(docs, [measure_id])

    means: dict[str, np.ndarray | None] = {}
    reasons: dict[str, str] = {}
    if metric == "cos":
        for d in docs:
            try:
                means[d], _ = doc_mean_vector(streams[d], table, max_oov)
            except MeasureError as exc:
                means[d] = None
                reasons[d] = str(exc)

    for i, a in enumerate(docs):
        for b in docs[i + 1:]:
            try:
                if metric == "cos":
                    if means[a] is None or means[b] is None:
                        raise MeasureError(reasons.get(a) or reasons.get(b, ""))
                    value = _cosine_sim(means[a], means[b], f"{a} vs {b}")
                else:
                    value = wmd(streams[a], streams[b], table, max_oov)
                out.set(a, b, measure_id, value)
            except MeasureError as exc:
                out.set_missing(a, b, measure_id, str(exc))
    return out


def contextual_pair_measure(matrices: dict[str, DocEmbeddingMatrix],
                            pooling: str) -> PairMeasureTable:
    """Cosine similarity between pooled vectors; id `ctx-<producer>-<pooling>`."""
    if not matrices:
        raise MeasureError("no embedding matrices given")
    producers = {m.producer for m in matrices.values()}
    if len(producers) != 1:
        raise ValidationError(f"mixed producers in one measure: {sorted(producers)}")
    dims = {m.vectors.shape[1] for m in matrices.values()}
    if len(dims) != 1:
        raise ValidationError(f"inconsistent embedding dims: {sorted(dims)}")
    producer = producers.pop()
    measure_id = f"ctx-{producer}-{pooling}"
    docs = sorted(matrices)
    pooled = {d: pooled_vector(matrices[d], pooling) for d in docs}
    out = PairMeasureTable.for_docs(docs, [measure_id])
    for i, a in enumerate(docs):
        for b in docs[i + 1:]:
            try:
                out.set(a, b, measure_id, _cosine_sim(pooled[a], pooled[b], f"{a} vs {b}"))
            except MeasureError as exc:
                out.set_missing(a, b, measure_id, str(exc))
    return out


# ---------------------------------------------------------------------------
# PSEM interchange files


def write_psem(path: str | Path, producer: str, vectors: np.ndarray) -> None:
    """Write one embedding matrix in the PSEM binary format."""
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)
    if vectors.ndim != 2 or vectors.shape[0] < 1:
        raise ValidationError("PSEM matrix must be 2-D with >= 1 row")
    if not np.isfinite(vectors).all():
        raise ValidationError("PSEM matrix contains NaN/Inf")
    m, dim = vectors.shape
    blob = producer.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(PSEM_MAGIC)
        fh.write(struct.pack("<III", PSEM_VERSION, dim, m))
        fh.write(struct.pack("<H", len(blob)))
        fh.write(blob)
        fh.write(vectors.astype("<f4").tobytes(order="C"))


def read_psem(path: str | Path, doc_id: str, unit: str = "token") -> DocEmbeddingMatrix:
    """Read one PSEM file; doc_id comes from the sidecar index, not the file."""
    producer, vectors = _read_psem_raw(path)
    return DocEmbeddingMatrix(doc_id=doc_id, unit=unit, producer=producer,
                              vectors=vectors)


def _read_psem_raw(path: str | Path) -> tuple[str, np.ndarray]:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 18 or data[:4] != PSEM_MAGIC:
        raise ParseError("not a PSEM file (bad magic)", str(path))
    version, dim, m = struct.unpack_from("<III", data, 4)
    if version != PSEM_VERSION:
        raise ParseError(f"unsupported PSEM version {version}", str(path))
    (plen,) = struct.unpack_from("<H", data, 16)
    if len(data) < 18 + plen:
        raise ParseError("truncated PSEM producer field", str(path))
    producer = data[18:18 + plen].decode("utf-8")
    body = data[18 + plen:]
    expected = m * dim * 4
    if len(body) != expected:
        raise ParseError(
            f"PSEM payload is {len(body)} bytes, header implies {expected}", str(path))
    if m < 1 or dim < 1:
        raise ParseError(f"PSEM header has m={m}, dim={dim}", str(path))
    vectors = np.frombuffer(body, dtype="<f4").reshape(m, dim).astype(np.float32)
    if not np.isfinite(vectors).all():
        raise ParseError("PSEM matrix contains NaN/Inf", str(path))
    return producer, vectors


def validate_psem(path: str | Path) -> dict:
    """Check one PSEM file; returns {"producer", "dim", "m"} or raises ParseError."""
    producer, vectors = _read_psem_raw(path)
    return {"producer": producer, "dim": vectors.shape[1], "m": vectors.shape[0]}


def read_psem_index(path: str | Path, unit: str = "token") -> dict[str, DocEmbeddingMatrix]:
    """Load every matrix named by a sidecar index CSV `doc_id,producer,path`.

    Relative paths resolve against the index file's directory.  All rows must
    share one producer (one index per measure).
    """
    path = Path(path)
    matrices: dict[str, DocEmbeddingMatrix] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PSEM_INDEX_HEADER:
            raise ValidationError(
                f"PSEM index header must be {','.join(PSEM_INDEX_HEADER)}")
        for row in reader:
            if len(row) != 3:
                raise ValidationError(f"bad PSEM index row: {row}")
            doc_id, producer, rel = row
            if doc_id in matrices:
                raise ValidationError(f"duplicate doc_id in PSEM index: {doc_id!r}")
            file_path = Path(rel)
            if not file_path.is_absolute():
                file_path = path.parent / file_path
            mat = read_psem(file_path, doc_id, unit)
            if mat.producer != producer:
                raise ValidationError(
                    f"index says producer {producer!r}, file says {mat.producer!r}"
                    f" for {doc_id!r}")
            matrices[doc_id] = mat
    if not matrices:
        raise ValidationError(f"PSEM index {path} lists no documents")
    return matrices
