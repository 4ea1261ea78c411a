"""Document-term matrices (TF and TF-IDF) and row-wise L1/L2/cosine measures."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .corpus import TokenStream, Vocabulary
from .errors import MeasureError, ValidationError
from .pairtable import PairMeasureTable

METRICS = ("l1", "l2", "cos")


@dataclass
class FrequencyMatrix:
    """Documents-as-rows frequency matrix over a fixed vocabulary.

    weighting="tf": each row is the empirical word distribution (sums to 1).
    weighting="tfidf": rows are tf * ln(n/df), scaled to unit L2 norm;
    all-zero rows stay zero.
    """

    docs: list[str]
    vocab: Vocabulary
    values: np.ndarray
    weighting: str
    normalized: bool = True

    def row(self, doc_id: str) -> np.ndarray:
        return self.values[self.docs.index(doc_id)]


def _count_matrix(streams: list[TokenStream], vocab: Vocabulary) -> np.ndarray:
    counts = np.zeros((len(streams), len(vocab)), dtype=np.float64)
    for i, stream in enumerate(streams):
        for tok in stream.flat_tokens():
            j = vocab.index.get(tok)
            if j is None:
                raise ValidationError(
                    f"token {tok!r} of document {stream.doc_id!r} is not in the vocabulary")
            counts[i, j] += 1.0
    return counts


def build_tf(streams: list[TokenStream], vocab: Vocabulary) -> FrequencyMatrix:
    """Row i = empirical word distribution of document i."""
    counts = _count_matrix(streams, vocab)
    totals = counts.sum(axis=1)
    for stream, total in zip(streams, totals):
        if total == 0:
            raise MeasureError(f"document {stream.doc_id!r} has no tokens")
    values = counts / totals[:, None]
    return FrequencyMatrix(docs=[s.doc_id for s in streams], vocab=vocab,
                           values=values, weighting="tf")


def build_tfidf(streams: list[TokenStream], vocab: Vocabulary) -> FrequencyMatrix:
    """tf(i,k) * ln(n / df(k)), rows scaled to unit L2 norm.

    A word present in every document gets idf 0, hence a zero column; rows
    that end up all-zero are left as zeros.
    """
    tf = build_tf(streams, vocab)
    n = len(streams)
    df = (tf.values > 0).sum(axis=0)
    idf = np.zeros(len(vocab))
    present = df > 0
    idf[present] = np.log(n / df[present])
    values = tf.values * idf
    norms = np.linalg.norm(values, axis=1)
    nonzero = norms > 0
    values[nonzero] /= norms[nonzero, None]
    return FrequencyMatrix(docs=tf.docs, vocab=vocab, values=values, weighting="tfidf")


def pairwise_measure(matrix: FrequencyMatrix, metric: str) -> PairMeasureTable:
    """All unordered document pairs under one metric.

    Cosine between two zero rows is defined as 0 (a warning is emitted).
    """
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}; expected one of {METRICS}")
    n = len(matrix.docs)
    if n < 2:
        raise ValidationError("need at least 2 documents")
    if metric == "l1":
        full = _kernels.pairwise_l1(matrix.values)
    elif metric == "l2":
        full = _kernels.pairwise_l2(matrix.values)
    else:
        if not np.linalg.norm(matrix.values, axis=1).all():
            warnings.warn("zero rows present; their cosine similarity is defined as 0")
        full = _kernels.pairwise_cosine(matrix.values)
    measure_id = f"wf-{matrix.weighting}-{metric}"
    table = PairMeasureTable.for_docs(matrix.docs, [measure_id])
    for i in range(n):
        for j in range(i + 1, n):
            table.set(matrix.docs[i], matrix.docs[j], measure_id, full[i, j])
    return table
