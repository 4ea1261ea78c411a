"""Shared fixtures and small builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from progsim.corpus import Document, TokenStream

FIXTURES = Path(__file__).parent / "fixtures"


def make_stream(doc_id: str, sentences: list[list[str]]) -> TokenStream:
    return TokenStream(doc_id=doc_id, sentences=sentences)


def make_doc(doc_id: str, text: str, party: str = "p",
             election: str = "e") -> Document:
    return Document(doc_id=doc_id, party_id=party, election_id=election,
                    raw_text=text)


@pytest.fixture
def toy_tree(tmp_path):
    """Full toy input tree (corpus, model, benchmarks, contextual index)
    with its config at <root>/run.toml; returns the root directory."""
    import toydata
    return toydata.write_config(tmp_path, psem_index=FIXTURES / "psem" / "index.csv")
