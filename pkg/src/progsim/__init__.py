"""Similarity measures between party programmes, and benchmarks to rank them."""

from .errors import (
    ConfigError,
    IngestError,
    MeasureError,
    ParseError,
    ProgsimError,
    ValidationError,
)
from .corpus import Document, TokenStream, load_corpus, preprocess
from .pairtable import PairMeasureTable

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Document",
    "IngestError",
    "MeasureError",
    "PairMeasureTable",
    "ParseError",
    "ProgsimError",
    "TokenStream",
    "ValidationError",
    "load_corpus",
    "preprocess",
    "__version__",
]
