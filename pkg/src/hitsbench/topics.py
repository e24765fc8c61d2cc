"""Document vectors, per-topic centroid representations and cosine similarity.

Document embeddings either come from an external encoder via the embedding
file format (header line declaring the dimension, then one record per line)
or from the built-in hashed tf-idf encoder. Topic vectors are the arithmetic
mean of the topic's document vectors, taken exactly as ingested.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .errors import (
    ConfigError,
    CoverageError,
    DataError,
    DegenerateInputError,
    IntegrityError,
    ParseError,
)

EMBEDDINGS_SCHEMA = "embeddings/v1"

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class DocumentEmbedding:
    doc_id: str
    vector: np.ndarray


@dataclass(frozen=True)
class TopicRepresentation:
    topic_id: str
    vector: np.ndarray
    doc_count: int


@dataclass(frozen=True)
class EncoderConfig:
    """Built-in hashed tf-idf encoder settings."""

    dim: int = 4096
    use_idf: bool = True


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs (underscores excluded)."""
    return _TOKEN_RE.findall(text.lower())


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


def ingest_embeddings(path: str | Path, corpus: Corpus) -> list[DocumentEmbedding]:
    """Read an embedding file and check it covers the corpus exactly."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line) if header_line.strip() else None
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line 1: invalid header: {exc}") from exc
        if not isinstance(header, dict) or header.get("schema") != EMBEDDINGS_SCHEMA:
            raise ParseError(f"{path}: line 1: expected schema {EMBEDDINGS_SCHEMA!r}")
        dim = header.get("dim")
        if not isinstance(dim, int) or dim < 2:
            raise ParseError(f"{path}: line 1: header must declare integer dim >= 2")

        embeddings: list[DocumentEmbedding] = []
        seen: set[str] = set()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: invalid record: {exc}") from exc
            if not isinstance(record, list) or len(record) != 2:
                raise ParseError(f"{path}: line {lineno}: expected [doc_id, vector]")
            doc_id, values = record
            if not isinstance(values, list) or len(values) != dim:
                raise DataError(
                    f"{path}: line {lineno}: vector for {doc_id!r} has length "
                    f"{len(values) if isinstance(values, list) else 'n/a'}, expected {dim}"
                )
            if doc_id not in corpus:
                raise CoverageError(f"{path}: line {lineno}: doc_id {doc_id!r} not in corpus")
            if doc_id in seen:
                raise IntegrityError(f"{path}: line {lineno}: duplicate embedding for {doc_id!r}")
            seen.add(doc_id)
            vector = np.asarray(values, dtype=float)
            if not np.all(np.isfinite(vector)):
                raise DataError(f"{path}: line {lineno}: non-finite component for {doc_id!r}")
            embeddings.append(DocumentEmbedding(doc_id, vector))

    missing = [d.doc_id for d in corpus.documents if d.doc_id not in seen]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise CoverageError(f"{path}: embeddings missing for {shown}{more}")
    return embeddings


def write_embeddings(embeddings: Sequence[DocumentEmbedding], path: str | Path) -> None:
    if not embeddings:
        raise DataError("cannot write an empty embedding collection")
    dim = len(embeddings[0].vector)
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": EMBEDDINGS_SCHEMA, "dim": dim}) + "\n")
        for emb in embeddings:
            fh.write(json.dumps([emb.doc_id, [float(v) for v in emb.vector]]) + "\n")


def encode_tfidf_hashed(
    corpus: Corpus, dim: int, config: EncoderConfig | None = None
) -> list[DocumentEmbedding]:
    """Deterministic hashed token counts with idf weighting, L2-normalized.

    A fallback encoder so the pipeline runs without an external model; the
    hash is a fixed blake2b digest, so output is identical across runs and
    platforms for a given (corpus, dim, config).
    """
    if dim < 2:
        raise ConfigError(f"embedding dim must be >= 2, got {dim}")
    config = config or EncoderConfig(dim=dim)

    doc_counts: list[tuple[str, dict[int, int]]] = []
    df = np.zeros(dim, dtype=float)
    for doc in corpus.documents:
        tokens = tokenize(doc.text)
        if not tokens:
            raise DegenerateInputError(
                f"document {doc.doc_id!r} has no tokens; cannot encode a zero vector"
            )
        counts: dict[int, int] = {}
        for tok in tokens:
            b = _bucket(tok, dim)
            counts[b] = counts.get(b, 0) + 1
        doc_counts.append((doc.doc_id, counts))
        for b in counts:
            df[b] += 1.0

    n_docs = len(corpus.documents)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0 if config.use_idf else np.ones(dim)

    embeddings = []
    for doc_id, counts in doc_counts:
        vec = np.zeros(dim, dtype=float)
        for b, c in counts.items():
            vec[b] = c * idf[b]
        norm = math.sqrt(float(np.dot(vec, vec)))
        embeddings.append(DocumentEmbedding(doc_id, vec / norm))
    return embeddings


def build_topic_vectors(
    embeddings: Iterable[DocumentEmbedding], corpus: Corpus
) -> list[TopicRepresentation]:
    """Per-topic arithmetic mean of document vectors, in sorted topic order."""
    by_id: dict[str, np.ndarray] = {}
    for emb in embeddings:
        if emb.doc_id in by_id:
            raise IntegrityError(f"duplicate embedding for doc {emb.doc_id!r}")
        by_id[emb.doc_id] = emb.vector
    missing = [d.doc_id for d in corpus.documents if d.doc_id not in by_id]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        raise CoverageError(f"embeddings missing for {shown}")

    reps = []
    for topic_id in corpus.topic_ids():
        doc_ids = corpus.topic_index[topic_id]
        stacked = np.stack([by_id[d] for d in doc_ids])
        reps.append(TopicRepresentation(topic_id, stacked.mean(axis=0), len(doc_ids)))
    return reps


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DegenerateInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine undefined for a zero vector")
    value = float(np.dot(a, b)) / (na * nb)
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric topic-by-topic cosine matrix with unit diagonal."""

    topic_ids: tuple[str, ...]
    values: np.ndarray

    def index(self, topic_id: str) -> int:
        try:
            return self.topic_ids.index(topic_id)
        except ValueError:
            raise KeyError(f"topic {topic_id!r} not in similarity matrix") from None

    def sim(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])


def topic_similarity_matrix(topics: Sequence[TopicRepresentation]) -> SimilarityMatrix:
    if len(topics) < 2:
        raise ConfigError("similarity matrix needs at least 2 topics")
    vectors = np.stack([t.vector for t in topics]).astype(float)
    norms = np.linalg.norm(vectors, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"topic {topics[int(zero[0])].topic_id!r} has a zero vector")
    unit = vectors / norms[:, None]
    m = unit @ unit.T
    m = (m + m.T) / 2.0  # enforce exact symmetry
    np.fill_diagonal(m, 1.0)
    np.clip(m, -1.0, 1.0, out=m)
    return SimilarityMatrix(tuple(t.topic_id for t in topics), m)
