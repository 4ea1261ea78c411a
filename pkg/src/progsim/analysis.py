"""Evaluation machinery: self-similarity checks, inter-measure correlation,
correlation-constrained agglomerative clustering, and benchmark reports.

All correlation work runs on a similarity orientation: an orientation map
(+1 similarity, -1 distance) flips distance-like columns first, so that
"more similar" always means "larger".  Missing cells are handled
pairwise-complete for plain correlations and listwise within the involved
measure set for the regression/canonical linkages.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Document, TokenStream
from .errors import MeasureError
from .pairtable import PairMeasureTable

DEFAULT_THRESHOLD = 0.75
DEFAULT_MIN_CHARS = 32768
RIDGE = 1e-8
MIN_ROWS = 3


# ---------------------------------------------------------------------------
# self-similarity


@dataclass
class SelfSimilarityReport:
    measure_id: str
    self_values: dict[str, float]     # doc_id -> odd/even-half value
    cross_values: list[float]         # all inter-document values
    separation: float                 # P(self beats cross), rank-sum based

    @property
    def median_self(self) -> float:
        return float(np.median(list(self.self_values.values()))) if self.self_values else math.nan

    @property
    def median_cross(self) -> float:
        return float(np.median(self.cross_values)) if self.cross_values else math.nan


def split_halves(stream: TokenStream) -> tuple[TokenStream, TokenStream]:
    """Odd-sentence and even-sentence halves (1-based positions)."""
    odd = [s for i, s in enumerate(stream.sentences) if i % 2 == 0]
    even = [s for i, s in enumerate(stream.sentences) if i % 2 == 1]
    return (TokenStream(stream.doc_id + "#odd", odd),
            TokenStream(stream.doc_id + "#even", even))


def _rank_sum_separation(self_vals: list[float], cross_vals: list[float],
                         orientation: int) -> float:
    """Mann-Whitney-style P(self value beats a cross value); 0.5 = chance."""
    if not self_vals or not cross_vals:
        return math.nan
    wins = 0.0
    for s in self_vals:
        for c in cross_vals:
            a, b = orientation * s, orientation * c
            wins += 1.0 if a > b else (0.5 if a == b else 0.0)
    return wins / (len(self_vals) * len(cross_vals))


def self_similarity_test(documents: dict[str, Document],
                         streams: dict[str, TokenStream],
                         measure_fn, measure_id: str = "measure",
                         min_chars: int = DEFAULT_MIN_CHARS,
                         orientation: int = 1) -> SelfSimilarityReport:
    """Compare each long document against itself, split into odd and even
    sentences, and set those values against all inter-document values.

    `measure_fn(stream_a, stream_b) -> float`; `orientation` says whether
    larger means more similar (+1) or less (-1).  Documents qualify when
    their raw text has at least `min_chars` characters.
    """
    qualifying = sorted(d for d, doc in documents.items()
                        if doc.char_length >= min_chars and d in streams)
    if not qualifying:
        warnings.warn(f"no document has >= {min_chars} characters; empty report")
    self_values: dict[str, float] = {}
    for d in qualifying:
        odd, even = split_halves(streams[d])
        if not odd.token_count or not even.token_count:
            warnings.warn(f"document {d!r} has an empty half; skipped")
            continue
        self_values[d] = measure_fn(odd, even)
    doc_ids = sorted(streams)
    cross_values = [measure_fn(streams[a], streams[b])
                    for i, a in enumerate(doc_ids) for b in doc_ids[i + 1:]]
    separation = _rank_sum_separation(list(self_values.values()), cross_values,
                                      orientation)
    return SelfSimilarityReport(measure_id=measure_id, self_values=self_values,
                                cross_values=cross_values, separation=separation)


# ---------------------------------------------------------------------------
# correlations


def oriented_columns(table: PairMeasureTable, measures: list[str],
                     orientations: dict[str, int] | None) -> np.ndarray:
    """Stack measure columns, sign-flipping distance-like ones to similarity."""
    orientations = orientations or {}
    cols = []
    for m in measures:
        col = table.column(m).astype(float)
        if orientations.get(m, 1) < 0:
            col = -col
        cols.append(col)
    return np.column_stack(cols)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    ok = ~(np.isnan(x) | np.isnan(y))
    if ok.sum() < MIN_ROWS:
        return math.nan
    xs, ys = x[ok], y[ok]
    if xs.std() == 0.0 or ys.std() == 0.0:
        return math.nan
    return float(np.corrcoef(xs, ys)[0, 1])


def correlation_matrix(table: PairMeasureTable, measures: list[str] | None = None,
                       orientations: dict[str, int] | None = None
                       ) -> tuple[list[str], np.ndarray]:
    """Pairwise-complete Pearson correlations between oriented measures.

    Measures without variance over their present values are excluded with a
    warning.  Returns (kept measure ids, correlation matrix); cells with
    fewer than 3 common rows are NaN.
    """
    measures = list(measures) if measures is not None else list(table.measures)
    if len(measures) < 2:
        raise MeasureError("need at least two measures to correlate")
    X = oriented_columns(table, measures, orientations)
    kept = []
    for k, m in enumerate(measures):
        col = X[:, k]
        present = col[~np.isnan(col)]
        if present.size >= 2 and present.std() > 0.0:
            kept.append(k)
        else:
            warnings.warn(f"measure {m!r} has no variance; excluded from correlations")
    X = X[:, kept]
    names = [measures[k] for k in kept]
    n = len(names)
    R = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            R[i, j] = R[j, i] = _pearson(X[:, i], X[:, j])
    return names, R


# ---------------------------------------------------------------------------
# clustering


@dataclass
class MeasureClusterTree:
    leaves: list[str]
    merges: list[tuple[tuple[str, ...], tuple[str, ...], float]] = field(default_factory=list)
    clusters: list[list[str]] = field(default_factory=list)
    min_intra: list[float] = field(default_factory=list)


def _complete_rows(X: np.ndarray, cols: list[int]) -> np.ndarray:
    return ~np.isnan(X[:, cols]).any(axis=1)


def _gram_inv_chol(G: np.ndarray, what: str) -> np.ndarray:
    """Cholesky factor of a Gram matrix, ridging it when rank-deficient."""
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        warnings.warn(f"rank-deficient {what}; adding ridge {RIDGE:g}")
        return np.linalg.cholesky(G + RIDGE * np.eye(G.shape[0]))


def _multiple_correlation(y: np.ndarray, X: np.ndarray) -> float:
    """Correlation of y with its least-squares projection onto span(X)."""
    yc = y - y.mean()
    Xc = X - X.mean(axis=0)
    sst = float(yc @ yc)
    if sst == 0.0:
        return math.nan
    G = Xc.T @ Xc
    L = _gram_inv_chol(G, "cluster Gram matrix")
    beta = np.linalg.solve(L.T, np.linalg.solve(L, Xc.T @ yc))
    fitted = Xc @ beta
    r2 = float(fitted @ yc) / sst
    return math.sqrt(min(max(r2, 0.0), 1.0))


def _canonical_correlation(A: np.ndarray, B: np.ndarray) -> float:
    """First canonical correlation between two centered column blocks."""
    Ac = A - A.mean(axis=0)
    Bc = B - B.mean(axis=0)
    La = _gram_inv_chol(Ac.T @ Ac, "cluster Gram matrix")
    Lb = _gram_inv_chol(Bc.T @ Bc, "cluster Gram matrix")
    K = np.linalg.solve(La, Ac.T @ Bc)
    K = np.linalg.solve(Lb, K.T).T
    s = np.linalg.svd(K, compute_uv=False)
    return float(min(max(s[0], 0.0), 1.0)) if s.size else math.nan


def _linkage(X: np.ndarray, a: list[int], b: list[int]) -> float:
    """Inter-cluster correlation: Pearson, multiple, or first canonical."""
    ok = _complete_rows(X, a + b)
    if ok.sum() < MIN_ROWS:
        return math.nan
    Xa, Xb = X[np.ix_(ok, a)], X[np.ix_(ok, b)]
    if len(a) == 1 and len(b) == 1:
        return _pearson(Xa[:, 0], Xb[:, 0])
    if len(a) == 1:
        return _multiple_correlation(Xa[:, 0], Xb)
    if len(b) == 1:
        return _multiple_correlation(Xb[:, 0], Xa)
    return _canonical_correlation(Xa, Xb)


def cluster_measures(table: PairMeasureTable, threshold: float = DEFAULT_THRESHOLD,
                     measures: list[str] | None = None,
                     orientations: dict[str, int] | None = None) -> MeasureClusterTree:
    """Greedy agglomeration of measures under a minimum-correlation floor.

    At every step the most-correlated admissible cluster pair is merged,
    where admissible means the merged cluster's minimal pairwise Pearson
    correlation stays at or above `threshold`; the process stops when no
    admissible merge remains.  Linkage is plain Pearson between singletons,
    multiple correlation between a singleton and a cluster, and the first
    canonical correlation between two clusters.
    """
    names, R = correlation_matrix(table, measures, orientations)
    X = oriented_columns(table, names, orientations)
    tree = MeasureClusterTree(leaves=list(names))
    clusters: list[list[int]] = [[k] for k in range(len(names))]

    def admissible(a: list[int], b: list[int]) -> bool:
        for i in a + b:
            for j in a + b:
                if i < j and not (R[i, j] >= threshold):
                    return False  # NaN also fails
        return True

    while len(clusters) > 1:
        candidates = []
        for ia in range(len(clusters)):
            for ib in range(ia + 1, len(clusters)):
                link = _linkage(X, clusters[ia], clusters[ib])
                if not math.isnan(link):
                    key = (tuple(names[k] for k in clusters[ia]),
                           tuple(names[k] for k in clusters[ib]))
                    candidates.append((link, key, ia, ib))
        candidates.sort(key=lambda t: (-t[0], t[1]))
        merged = False
        for link, key, ia, ib in candidates:
            if admissible(clusters[ia], clusters[ib]):
                tree.merges.append((key[0], key[1], link))
                clusters[ia] = sorted(clusters[ia] + clusters[ib])
                del clusters[ib]
                merged = True
                break
        if not merged:
            break

    for cl in sorted(clusters):
        tree.clusters.append([names[k] for k in cl])
        intra = [float(R[i, j]) for i in cl for j in cl if i < j]
        tree.min_intra.append(min(intra) if intra else 1.0)
    return tree


# ---------------------------------------------------------------------------
# benchmark report


@dataclass
class BenchmarkReport:
    clusters: list[list[str]]
    benchmarks: list[str]
    values: np.ndarray  # len(clusters) x len(benchmarks), NaN = missing

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["cluster"] + self.benchmarks)
            for i, members in enumerate(self.clusters):
                row = ["+".join(members)]
                for j in range(len(self.benchmarks)):
                    v = self.values[i, j]
                    row.append("" if math.isnan(v) else repr(float(v)))
                writer.writerow(row)


def cluster_representative(X: np.ndarray) -> np.ndarray:
    """First principal component scores of standardized columns, oriented so
    the mean loading is positive; rows with any NaN get NaN scores."""
    ok = ~np.isnan(X).any(axis=1)
    scores = np.full(X.shape[0], math.nan)
    sub = X[ok]
    if sub.shape[0] < MIN_ROWS:
        return scores
    mu = sub.mean(axis=0)
    sd = sub.std(axis=0)
    sd[sd == 0.0] = 1.0
    Z = (sub - mu) / sd
    corr = (Z.T @ Z) / max(Z.shape[0] - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(corr)
    pc = eigvecs[:, -1]
    if pc.mean() < 0:
        pc = -pc
    scores[ok] = Z @ pc
    return scores


def benchmark_report(table: PairMeasureTable, clusters: list[list[str]],
                     benchmark_ids: list[str],
                     orientations: dict[str, int] | None = None) -> BenchmarkReport:
    """Correlate each cluster's representative with each benchmark column.

    The representative is the cluster's first principal component (single
    measures represent themselves); correlations run over pairs where both
    the representative and the benchmark are present, needing at least 3.
    """
    values = np.full((len(clusters), len(benchmark_ids)), math.nan)
    bench_cols = oriented_columns(table, benchmark_ids, orientations) \
        if benchmark_ids else np.empty((len(table.pairs), 0))
    for i, members in enumerate(clusters):
        X = oriented_columns(table, members, orientations)
        rep = X[:, 0] if len(members) == 1 else cluster_representative(X)
        for j in range(len(benchmark_ids)):
            values[i, j] = _pearson(rep, bench_cols[:, j])
    return BenchmarkReport(clusters=[list(c) for c in clusters],
                           benchmarks=list(benchmark_ids), values=values)
