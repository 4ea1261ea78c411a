"""Pair-measure table: canonical keys, missing values, CSV round-trip."""

from __future__ import annotations

import math

import numpy as np
import pytest

from progsim.errors import ValidationError
from progsim.pairtable import PairMeasureTable, pair_key


def test_pair_key_canonical_order():
    assert pair_key("b", "a") == ("a", "b")
    assert pair_key("a", "b") == ("a", "b")


def test_pair_key_rejects_self():
    with pytest.raises(ValidationError):
        pair_key("a", "a")


def test_for_docs_all_pairs():
    t = PairMeasureTable.for_docs(["c", "a", "b"], ["m"])
    assert t.pairs == [("a", "b"), ("a", "c"), ("b", "c")]


def test_set_get_symmetric():
    t = PairMeasureTable.for_docs(["a", "b"], ["m"])
    t.set("b", "a", "m", 0.5)
    assert t.get("a", "b", "m") == 0.5
    assert t.get("b", "a", "m") == 0.5


def test_get_default_nan():
    t = PairMeasureTable.for_docs(["a", "b"], ["m"])
    assert math.isnan(t.get("a", "b", "m"))


def test_set_missing_records_reason():
    t = PairMeasureTable.for_docs(["a", "b"], ["m"])
    t.set_missing("a", "b", "m", "model lacks every token")
    assert math.isnan(t.get("a", "b", "m"))
    assert t.reasons[("a", "b", "m")] == "model lacks every token"


def test_column_aligned_with_pairs():
    t = PairMeasureTable.for_docs(["a", "b", "c"], ["m"])
    t.set("a", "b", "m", 1.0)
    t.set("b", "c", "m", 3.0)
    col = t.column("m")
    assert col.shape == (3,)
    assert col[0] == 1.0 and math.isnan(col[1]) and col[2] == 3.0


def test_matrix_column_order():
    t = PairMeasureTable.for_docs(["a", "b"], ["m1", "m2"])
    t.set("a", "b", "m1", 1.0)
    t.set("a", "b", "m2", 2.0)
    M = t.matrix(["m2", "m1"])
    assert M.shape == (1, 2)
    assert M[0, 0] == 2.0 and M[0, 1] == 1.0


def test_merge_union():
    t1 = PairMeasureTable.for_docs(["a", "b"], ["m1"])
    t1.set("a", "b", "m1", 1.0)
    t2 = PairMeasureTable.for_docs(["a", "b", "c"], ["m2"])
    t2.set("a", "c", "m2", 2.0)
    t2.set_missing("b", "c", "m2", "why not")
    t1.merge(t2)
    assert t1.pairs == [("a", "b"), ("a", "c"), ("b", "c")]
    assert t1.measures == ["m1", "m2"]
    assert t1.get("a", "b", "m1") == 1.0
    assert t1.get("a", "c", "m2") == 2.0
    assert t1.reasons[("b", "c", "m2")] == "why not"


def test_csv_roundtrip(tmp_path):
    t = PairMeasureTable.for_docs(["a", "b", "c"], ["m1", "m2"])
    t.set("a", "b", "m1", 1.0 / 3.0)
    t.set("a", "b", "m2", 0.7)
    t.set_missing("a", "c", "m1", "nope")
    t.set("b", "c", "m1", 1e-17)
    path = tmp_path / "measures.csv"
    t.to_csv(path)
    back = PairMeasureTable.from_csv(path)
    assert back.pairs == t.pairs
    assert back.get("a", "b", "m1") == 1.0 / 3.0       # repr round-trips exactly
    assert back.get("b", "c", "m1") == 1e-17
    assert math.isnan(back.get("a", "c", "m1"))


def test_csv_deterministic_bytes(tmp_path):
    def build():
        t = PairMeasureTable.for_docs(["b", "a"], [])
        t.set("b", "a", "m2", 0.25)
        t.set("a", "b", "m1", np.float64(1) / 7)
        return t

    p1, p2 = tmp_path / "one.csv", tmp_path / "two.csv"
    build().to_csv(p1)
    build().to_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()
    assert lines[0] == "doc_a,doc_b,measure_id,value"
    assert lines[1].startswith("a,b,m1,")


def test_from_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c,d\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        PairMeasureTable.from_csv(path)
