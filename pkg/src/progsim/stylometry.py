"""Stylometric distances over the N most frequent corpus words.

The profile is built from token streams that keep stop words: for stylometric
purposes the function words ARE the signal.  Eight distances are offered:

* cos     -- 1 - cosine similarity of relative-frequency rows
* delta   -- mean |z_i - z_j| (Burrows)
* argamon -- L2 of z differences in the eigenbasis of the word-frequency
             covariance matrix, axes scaled by inverse sqrt eigenvalues
* eder    -- delta with rank weights (N + 1 - rank) / N on z values
* cosd    -- 1 - cosine similarity of z rows
* entropy -- cross-entropy -sum f_i ln f_j (directed; pair tables store the
             mean of both directions)
* minmax  -- 1 - sum(min) / sum(max) over frequency rows (Ruzicka)
* simple  -- sum |sqrt f_i - sqrt f_j|

z-scores standardize each word across documents (sample std); words whose
frequency does not vary across the corpus are dropped from the z-based
metrics with a warning.
"""

from __future__ import annotations

import warnings
from collections import Counter

import numpy as np

from . import _kernels
from .corpus import TokenStream
from .errors import MeasureError
from .pairtable import PairMeasureTable

METRICS = ("cos", "delta", "argamon", "eder", "cosd", "entropy", "minmax", "simple")
MFW_SIZES = (50, 100, 200)
ENTROPY_EPS = 1e-12
EIGVAL_FLOOR = 1e-10


class MfwProfile:
    """Relative frequencies and z-scores of the top-N corpus words.

    `words` is ordered by descending corpus-wide count, ties broken
    lexicographically.  `zscores` covers only the columns with nonzero
    variance (`retained` holds their indices into `words`).
    """

    def __init__(self, docs: list[str], words: list[str], freq: np.ndarray):
        self.N = len(words)
        self.docs = list(docs)
        self.words = list(words)
        self.freq = freq
        mu = freq.mean(axis=0)
        sigma = freq.std(axis=0, ddof=1)
        keep = sigma > 0.0
        if not keep.all():
            dropped = [words[k] for k in np.flatnonzero(~keep)]
            warnings.warn(
                f"dropping {len(dropped)} zero-variance word(s) from z-scores: "
                + ", ".join(dropped[:5]) + ("..." if len(dropped) > 5 else ""))
        self.retained = np.flatnonzero(keep)
        self.zscores = (freq[:, keep] - mu[keep]) / sigma[keep]
        self._rotation: np.ndarray | None = None

    def row_index(self, doc_id: str) -> int:
        return self.docs.index(doc_id)

    def rotation(self) -> np.ndarray:
        """Whitening map from z-space into the frequency-covariance eigenbasis.

        Columns are eigenvectors of the covariance of the retained frequency
        columns, scaled by 1/sqrt(eigenvalue); eigenvalues below 1e-10 are
        dropped.  Cached after the first call.
        """
        if self._rotation is None:
            cov = np.cov(self.freq[:, self.retained], rowvar=False, ddof=1)
            cov = np.atleast_2d(cov)
            eigvals, eigvecs = np.linalg.eigh(cov)
            keep = eigvals > EIGVAL_FLOOR
            self._rotation = eigvecs[:, keep] / np.sqrt(eigvals[keep])
        return self._rotation


def build_mfw(streams: dict[str, TokenStream], n_words: int) -> MfwProfile:
    """Profile over the `n_words` most frequent words of the whole corpus."""
    if len(streams) < 2:
        raise MeasureError("need at least two documents for a profile")
    docs = sorted(streams)
    counts = {d: Counter(streams[d].flat_tokens()) for d in docs}
    totals: Counter = Counter()
    for c in counts.values():
        totals.update(c)
    if len(totals) < n_words:
        raise MeasureError(
            f"corpus has {len(totals)} distinct words, need {n_words}")
    words = [w for w, _ in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))[:n_words]]
    freq = np.zeros((len(docs), n_words))
    for i, d in enumerate(docs):
        n_tokens = streams[d].token_count
        if n_tokens == 0:
            raise MeasureError(f"document {d!r} has no tokens")
        for k, w in enumerate(words):
            freq[i, k] = counts[d][w] / n_tokens
    return MfwProfile(docs, words, freq)


def _check_nonzero(v: np.ndarray, what: str) -> None:
    if not np.any(v):
        raise MeasureError(f"zero-norm {what} row in cosine distance")


def _cosine_dist(x: np.ndarray, y: np.ndarray) -> float:
    return 1.0 - float(x @ y) / float(np.linalg.norm(x) * np.linalg.norm(y))


def _cross_entropy(fi: np.ndarray, fj: np.ndarray) -> float:
    mask = fi > 0.0
    return float(-np.sum(fi[mask] * np.log(np.maximum(fj[mask], ENTROPY_EPS))))


def _eder_weights(profile: MfwProfile) -> np.ndarray:
    ranks = profile.retained + 1  # rank 1 = most frequent word
    return (profile.N + 1 - ranks) / profile.N


def styl_distance(profile: MfwProfile, i: int, j: int, metric: str) -> float:
    """One directed distance between profile rows i and j.

    All metrics are symmetric except `entropy`; callers wanting a symmetric
    entropy value should average both directions (`stylometry_table` does).
    """
    if i == j:
        raise MeasureError("distance of a document to itself is not defined")
    fi, fj = profile.freq[i], profile.freq[j]
    if metric == "cos":
        _check_nonzero(fi, "frequency"), _check_nonzero(fj, "frequency")
        return _cosine_dist(fi, fj)
    if metric == "minmax":
        denom = float(np.maximum(fi, fj).sum())
        if denom == 0.0:
            raise MeasureError("minmax undefined for two all-zero rows")
        return 1.0 - float(np.minimum(fi, fj).sum()) / denom
    if metric == "simple":
        return float(np.abs(np.sqrt(fi) - np.sqrt(fj)).sum())
    if metric == "entropy":
        return _cross_entropy(fi, fj)
    zi, zj = profile.zscores[i], profile.zscores[j]
    if metric == "delta":
        return float(np.abs(zi - zj).mean())
    if metric == "eder":
        return float((_eder_weights(profile) * np.abs(zi - zj)).mean())
    if metric == "cosd":
        _check_nonzero(zi, "z-score"), _check_nonzero(zj, "z-score")
        return _cosine_dist(zi, zj)
    if metric == "argamon":
        proj = (zi - zj) @ profile.rotation()
        return float(np.linalg.norm(proj))
    raise MeasureError(f"unknown stylometric metric {metric!r}")


def stylometry_table(streams: dict[str, TokenStream], n_words: int,
                     metrics: tuple[str, ...] = METRICS) -> PairMeasureTable:
    """All pairwise distances for one MFW size; ids `styl-<metric>_N<n>`.

    Vectorized over pairs via the shared kernels where the metric allows;
    entropy is symmetrized as the mean of both directions.
    """
    profile = build_mfw(streams, n_words)
    n = len(profile.docs)
    ids = {m: f"styl-{m}_N{n_words}" for m in metrics}
    table = PairMeasureTable.for_docs(profile.docs, [ids[m] for m in metrics])

    full = {}
    for metric in metrics:
        if metric == "cos":
            for row in profile.freq:
                _check_nonzero(row, "frequency")
            full[metric] = 1.0 - _kernels.pairwise_cosine(profile.freq)
        elif metric == "cosd":
            for row in profile.zscores:
                _check_nonzero(row, "z-score")
            full[metric] = 1.0 - _kernels.pairwise_cosine(profile.zscores)
        elif metric == "delta":
            w = np.ones(profile.zscores.shape[1])
            full[metric] = _kernels.pairwise_weighted_l1_mean(profile.zscores, w)
        elif metric == "eder":
            full[metric] = _kernels.pairwise_weighted_l1_mean(
                profile.zscores, _eder_weights(profile))
        else:
            dist = np.zeros((n, n))
            for i in range(n):
                for j in range(n):
                    if i != j:
                        dist[i, j] = styl_distance(profile, i, j, metric)
            if metric == "entropy":
                dist = 0.5 * (dist + dist.T)
            full[metric] = dist

    for i in range(n):
        for j in range(i + 1, n):
            for metric in metrics:
                table.set(profile.docs[i], profile.docs[j], ids[metric],
                          full[metric][i, j])
    return table
