#!/usr/bin/env python3
"""Regenerate the checked-in embedding-matrix fixtures under
tests/fixtures/psem.

One .psem file per toy document, one row per segmented sentence, seeded by
the document id so the files are reproducible.  Rerun whenever the toy
document texts in tests/toydata.py change.
"""

from __future__ import annotations

import csv
import hashlib
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
sys.path.insert(0, str(ROOT / "src"))

from progsim.corpus import segment_sentences  # noqa: E402
from progsim.embeddings import write_psem  # noqa: E402
from toydata import DOCS  # noqa: E402

PRODUCER = "fixembed"
DIM = 5


def main() -> None:
    out_dir = ROOT / "tests" / "fixtures" / "psem"
    out_dir.mkdir(parents=True, exist_ok=True)
    index_rows = []
    for doc_id, _party, _election, text in DOCS:
        sentences = segment_sentences(text)
        seed = int.from_bytes(hashlib.sha256(doc_id.encode()).digest()[:4], "little")
        rng = np.random.default_rng(seed)
        vectors = rng.normal(size=(len(sentences), DIM)).astype(np.float32)
        name = doc_id.replace("#", "_") + ".psem"
        write_psem(out_dir / name, PRODUCER, vectors)
        index_rows.append((doc_id, PRODUCER, name))
        print(f"{name}: {len(sentences)} rows")
    with open(out_dir / "index.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "producer", "path"])
        for row in index_rows:
            writer.writerow(row)
    print(f"index: {out_dir / 'index.csv'}")


if __name__ == "__main__":
    main()
