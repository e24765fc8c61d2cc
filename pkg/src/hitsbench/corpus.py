"""Topic- and author-labeled document collections and their file format.

Corpus files are UTF-8 text: a JSON header line declaring the schema version
and field order, then one JSON array per line with the four document fields.
Texts are stored as-is (no normalization or case folding at ingestion).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError, IntegrityError, ParseError, UnknownTopicError

CORPUS_SCHEMA = "corpus/v1"
CORPUS_FIELDS = ["doc_id", "author_id", "topic_id", "text"]


@dataclass(frozen=True)
class Document:
    doc_id: str
    author_id: str
    topic_id: str
    text: str


class Corpus:
    """Immutable document collection with topic and author indices."""

    def __init__(self, documents: Iterable[Document]):
        documents = tuple(documents)
        topic_index: dict[str, list[str]] = {}
        author_index: dict[str, list[str]] = {}
        by_id: dict[str, Document] = {}
        for doc in documents:
            if doc.doc_id in by_id:
                raise IntegrityError(f"duplicate doc_id {doc.doc_id!r}")
            if not doc.text.strip():
                raise IntegrityError(f"document {doc.doc_id!r} has empty text")
            if not doc.author_id or not doc.topic_id:
                raise IntegrityError(f"document {doc.doc_id!r} has empty author_id or topic_id")
            by_id[doc.doc_id] = doc
            topic_index.setdefault(doc.topic_id, []).append(doc.doc_id)
            author_index.setdefault(doc.author_id, []).append(doc.doc_id)
        self.documents = documents
        self.topic_index = topic_index
        self.author_index = author_index
        self._by_id = by_id

    def __len__(self) -> int:
        return len(self.documents)

    def doc(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise IntegrityError(f"unknown doc_id {doc_id!r}") from None

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def topic_ids(self) -> list[str]:
        """Topic ids sorted lexicographically."""
        return sorted(self.topic_index)

    def texts(self) -> dict[str, str]:
        """doc_id -> text mapping, in document order."""
        return {d.doc_id: d.text for d in self.documents}


@dataclass(frozen=True)
class CorpusStats:
    topic_count: int
    document_count: int
    author_count: int
    docs_per_topic: dict[str, int]


def load_corpus(path: str | Path, min_topics: int = 2) -> Corpus:
    """Read a corpus file, validating the schema header and every record.

    min_topics guards against degenerate inputs that the rest of the pipeline
    cannot use; pass min_topics=1 to admit single-topic files.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise ParseError(f"{path}: missing schema header line")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line 1: invalid header: {exc}") from exc
        if not isinstance(header, dict) or header.get("schema") != CORPUS_SCHEMA:
            raise ParseError(f"{path}: line 1: expected schema {CORPUS_SCHEMA!r}")
        fields = header.get("fields", CORPUS_FIELDS)
        if fields != CORPUS_FIELDS:
            raise ParseError(f"{path}: line 1: unsupported field order {fields!r}")

        documents: list[Document] = []
        seen: set[str] = set()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: invalid record: {exc}") from exc
            if not isinstance(record, list) or len(record) != len(CORPUS_FIELDS):
                raise ParseError(f"{path}: line {lineno}: expected {len(CORPUS_FIELDS)} fields")
            doc_id, author_id, topic_id, text = record
            if not all(isinstance(v, str) for v in record):
                raise ParseError(f"{path}: line {lineno}: all fields must be strings")
            if not text.strip():
                raise ParseError(f"{path}: line {lineno}: empty text for doc {doc_id!r}")
            if not author_id or not topic_id:
                raise ParseError(f"{path}: line {lineno}: empty author_id or topic_id")
            if doc_id in seen:
                raise IntegrityError(f"{path}: line {lineno}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            documents.append(Document(doc_id, author_id, topic_id, text))

    if not documents:
        raise DataError(f"{path}: corpus file contains no documents")
    corpus = Corpus(documents)
    if len(corpus.topic_index) < min_topics:
        raise DataError(
            f"{path}: corpus has {len(corpus.topic_index)} topic(s); at least {min_topics} required"
        )
    return corpus


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": CORPUS_SCHEMA, "fields": CORPUS_FIELDS}) + "\n")
        for doc in corpus.documents:
            fh.write(json.dumps([doc.doc_id, doc.author_id, doc.topic_id, doc.text]) + "\n")


def corpus_stats(corpus: Corpus) -> CorpusStats:
    return CorpusStats(
        topic_count=len(corpus.topic_index),
        document_count=len(corpus.documents),
        author_count=len(corpus.author_index),
        docs_per_topic={t: len(ids) for t, ids in sorted(corpus.topic_index.items())},
    )


def filter_to_topics(corpus: Corpus, keep: Iterable[str]) -> Corpus:
    """Corpus restricted to the given topics; indices rebuilt, order preserved."""
    keep = set(keep)
    unknown = keep - set(corpus.topic_index)
    if unknown:
        names = ", ".join(repr(t) for t in sorted(unknown))
        raise UnknownTopicError(f"unknown topic id(s): {names}")
    return Corpus(d for d in corpus.documents if d.topic_id in keep)


def relabel_topics(corpus: Corpus, mapping: Mapping[str, str]) -> Corpus:
    """Rewrite topic ids per mapping (used when merging unselected topics).

    Documents keep their identity and order; topics absent from the mapping
    are left unchanged.
    """
    unknown = set(mapping) - set(corpus.topic_index)
    if unknown:
        names = ", ".join(repr(t) for t in sorted(unknown))
        raise UnknownTopicError(f"unknown topic id(s) in relabel mapping: {names}")
    docs = [
        Document(d.doc_id, d.author_id, mapping.get(d.topic_id, d.topic_id), d.text)
        for d in corpus.documents
    ]
    return Corpus(docs)


def topics_with_min_docs(corpus: Corpus, min_docs: int) -> list[str]:
    """Topic ids holding at least min_docs documents, sorted."""
    return sorted(t for t, ids in corpus.topic_index.items() if len(ids) >= min_docs)
