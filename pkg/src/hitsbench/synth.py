"""Synthetic corpora with controllable topic-similarity structure.

Two generators:

* clustered_embedding_corpus builds document vectors directly: well-spread
  topic directions plus planted near-duplicate topic pairs whose centroids
  sit at a cosine of at least dup_cosine_floor. Used to exercise the sampler
  and split-similarity machinery without any text models.

* confounded_text_corpus builds actual texts where author identity is
  correlated with topic keywords: topic clusters come in near-duplicate
  pairs sharing a keyword pool, authors write in both topics of their
  cluster using an author-specific keyword subset, and every author also
  carries topic-independent character-level style markers. Random topic
  subsets tend to keep both members of a cluster (keyword leakage across the
  train/test boundary), while dispersion sampling keeps at most one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document
from .topics import DocumentEmbedding

FUNCTION_WORDS = (
    "the a of and to in it is was for on with as at by that this from or an "
    "be have not are were but had his her they you all we one"
).split()


def _letters(i: int, width: int = 2) -> str:
    out = []
    for _ in range(width):
        out.append(chr(97 + i % 26))
        i //= 26
    return "".join(reversed(out))


@dataclass
class ClusteredCorpus:
    corpus: Corpus
    embeddings: list[DocumentEmbedding]
    planted_pairs: list[tuple[str, str]]


def clustered_embedding_corpus(
    seed: int,
    n_free_topics: int = 10,
    n_dup_pairs: int = 5,
    docs_per_topic: int = 5,
    dim: int = 12,
    shared_weight: float = 1.0,
    doc_noise: float = 0.05,
    dup_eps: float = 0.18,
    dup_cosine_floor: float = 0.95,
) -> ClusteredCorpus:
    """Corpus + embeddings with planted near-duplicate topic pairs.

    Topic directions mix a shared component (with per-topic weight) into
    Gaussian noise, so pairwise similarities spread over a wide range instead
    of clustering near zero. Duplicate partners are small perturbations of
    their base topic; the generator asserts the realized centroid cosine of
    every planted pair is at least dup_cosine_floor.
    """
    rng = np.random.default_rng(seed)
    shared = rng.normal(size=dim)
    shared /= np.linalg.norm(shared)

    def base_direction() -> np.ndarray:
        w = shared_weight * rng.uniform(0.4, 1.6)
        v = w * shared + rng.normal(size=dim)
        return v / np.linalg.norm(v)

    directions: dict[str, np.ndarray] = {}
    planted: list[tuple[str, str]] = []
    for i in range(n_free_topics):
        directions[f"free{_letters(i)}"] = base_direction()
    for i in range(n_dup_pairs):
        a = base_direction()
        jitter = rng.normal(size=dim)
        jitter /= np.linalg.norm(jitter)
        b = a + dup_eps * jitter
        b /= np.linalg.norm(b)
        ta, tb = f"dup{_letters(i)}a", f"dup{_letters(i)}b"
        directions[ta] = a
        directions[tb] = b
        planted.append((ta, tb))

    documents, embeddings = [], []
    centroids: dict[str, np.ndarray] = {}
    for topic_id in sorted(directions):
        vecs = []
        for d in range(docs_per_topic):
            doc_id = f"{topic_id}-d{d}"
            vec = directions[topic_id] + doc_noise * rng.normal(size=dim)
            documents.append(Document(doc_id, f"{topic_id}-auth{d % 2}", topic_id, f"text {doc_id}"))
            embeddings.append(DocumentEmbedding(doc_id, vec))
            vecs.append(vec)
        centroids[topic_id] = np.mean(vecs, axis=0)

    for ta, tb in planted:
        ca, cb = centroids[ta], centroids[tb]
        cos = float(ca @ cb / (np.linalg.norm(ca) * np.linalg.norm(cb)))
        if cos < dup_cosine_floor:
            raise AssertionError(
                f"planted pair ({ta}, {tb}) realized cosine {cos:.4f} < {dup_cosine_floor}"
            )
    return ClusteredCorpus(Corpus(documents), embeddings, planted)


@dataclass
class ConfoundedCorpus:
    corpus: Corpus
    planted_pairs: list[tuple[str, str]]
    function_words: tuple[str, ...]
    style_pool: tuple[str, ...]

    @property
    def style_stoplist_size(self) -> int:
        """Stoplist size covering exactly the function words and style markers."""
        return len(self.function_words) + len(self.style_pool)


def confounded_text_corpus(
    seed: int,
    n_clusters: int = 10,
    authors_per_cluster: int = 5,
    docs_per_author_per_topic: int = 3,
    tokens_per_doc: int = 60,
    style_pool_size: int = 60,
    style_per_author: int = 4,
    keywords_per_cluster: int = 30,
    keywords_per_author: int = 8,
) -> ConfoundedCorpus:
    """Texts whose author signal lives in two places: character-level style
    markers shared across all topics, and author-specific topic keywords that
    only transfer between the two near-duplicate topics of a cluster."""
    rng = np.random.default_rng(seed)

    style_pool = tuple(f"q{_letters(i)}z" for i in range(style_pool_size))
    cluster_keywords = {
        c: tuple(f"k{_letters(c, 1)}{_letters(j)}w" for j in range(keywords_per_cluster))
        for c in range(n_clusters)
    }

    documents: list[Document] = []
    planted: list[tuple[str, str]] = []
    for c in range(n_clusters):
        topic_a, topic_b = f"c{_letters(c)}t0", f"c{_letters(c)}t1"
        planted.append((topic_a, topic_b))
        for a in range(authors_per_cluster):
            author = f"auth-c{_letters(c)}-{a}"
            style = [style_pool[int(i)] for i in rng.choice(style_pool_size, style_per_author, replace=False)]
            kws = [cluster_keywords[c][int(i)] for i in rng.choice(keywords_per_cluster, keywords_per_author, replace=False)]
            for topic_id in (topic_a, topic_b):
                for d in range(docs_per_author_per_topic):
                    tokens = []
                    for _ in range(tokens_per_doc):
                        r = rng.random()
                        if r < 0.40:
                            tokens.append(FUNCTION_WORDS[int(rng.integers(len(FUNCTION_WORDS)))])
                        elif r < 0.65:
                            tokens.append(style[int(rng.integers(len(style)))])
                        elif r < 0.90:
                            tokens.append(kws[int(rng.integers(len(kws)))])
                        else:
                            pool = cluster_keywords[c]
                            tokens.append(pool[int(rng.integers(len(pool)))])
                    doc_id = f"{topic_id}-{author}-d{d}"
                    documents.append(Document(doc_id, author, topic_id, " ".join(tokens)))

    return ConfoundedCorpus(
        corpus=Corpus(documents),
        planted_pairs=planted,
        function_words=tuple(FUNCTION_WORDS),
        style_pool=style_pool,
    )
