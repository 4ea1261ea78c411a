"""PairMeasureTable: one value per (document pair, measure), the central output.

Pairs are keyed by (doc_a, doc_b) with doc_a < doc_b lexicographically.
Missing values are NaN; an optional reason string records why a cell is
missing.  CSV serialization uses the long format doc_a,doc_b,measure_id,value
with an empty value field for missing cells.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

CSV_HEADER = ["doc_a", "doc_b", "measure_id", "value"]


def pair_key(x: str, y: str) -> tuple[str, str]:
    if x == y:
        raise ValidationError(f"pair of identical documents: {x!r}")
    return (x, y) if x < y else (y, x)


@dataclass
class PairMeasureTable:
    pairs: list[tuple[str, str]] = field(default_factory=list)
    measures: list[str] = field(default_factory=list)
    _cells: dict[tuple[str, str], dict[str, float]] = field(default_factory=dict)
    reasons: dict[tuple[str, str, str], str] = field(default_factory=dict)

    @classmethod
    def for_docs(cls, docs: list[str], measures: list[str]) -> "PairMeasureTable":
        """Empty table over all unordered pairs of the given documents."""
        table = cls(measures=list(measures))
        ordered = sorted(docs)
        for i in range(len(ordered)):
            for j in range(i + 1, len(ordered)):
                key = (ordered[i], ordered[j])
                table.pairs.append(key)
                table._cells[key] = {}
        return table

    def add_pair(self, x: str, y: str) -> None:
        key = pair_key(x, y)
        if key not in self._cells:
            self.pairs.append(key)
            self.pairs.sort()
            self._cells[key] = {}

    def set(self, x: str, y: str, measure_id: str, value: float,
            reason: str | None = None) -> None:
        key = pair_key(x, y)
        if key not in self._cells:
            raise ValidationError(f"unknown pair {key}")
        if measure_id not in self.measures:
            self.measures.append(measure_id)
        self._cells[key][measure_id] = float(value)
        if reason is not None:
            self.reasons[(key[0], key[1], measure_id)] = reason

    def set_missing(self, x: str, y: str, measure_id: str, reason: str) -> None:
        self.set(x, y, measure_id, math.nan, reason=reason)

    def get(self, x: str, y: str, measure_id: str) -> float:
        key = pair_key(x, y)
        return self._cells.get(key, {}).get(measure_id, math.nan)

    def column(self, measure_id: str) -> np.ndarray:
        """Values for one measure aligned with self.pairs (NaN = missing)."""
        return np.array([self._cells[k].get(measure_id, math.nan) for k in self.pairs])

    def matrix(self, measures: list[str] | None = None) -> np.ndarray:
        cols = measures if measures is not None else self.measures
        return np.column_stack([self.column(m) for m in cols]) if cols else np.empty((len(self.pairs), 0))

    def merge(self, other: "PairMeasureTable") -> None:
        """Fold another table into this one (union of pairs and measures)."""
        for key in other.pairs:
            if key not in self._cells:
                self.pairs.append(key)
                self._cells[key] = {}
        self.pairs.sort()
        for m in other.measures:
            if m not in self.measures:
                self.measures.append(m)
        for key, row in other._cells.items():
            self._cells[key].update(row)
        self.reasons.update(other.reasons)

    def to_csv(self, path: str | Path) -> None:
        """Long format, rows sorted by (doc_a, doc_b, measure_id)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for a, b in sorted(self.pairs):
                row = self._cells[(a, b)]
                for m in sorted(row):
                    v = row[m]
                    writer.writerow([a, b, m, "" if math.isnan(v) else repr(v)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "PairMeasureTable":
        table = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ValidationError(f"pair table header must be {','.join(CSV_HEADER)}")
            for a, b, m, v in reader:
                if (a, b) != pair_key(a, b):
                    raise ValidationError(f"pair not in canonical order: {a},{b}")
                table.add_pair(a, b)
                table.set(a, b, m, float(v) if v != "" else math.nan)
        return table
