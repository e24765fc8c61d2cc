"""Cross-topic k-fold evaluation splits and verification-pair generation.

Folds are built over topics, never over documents: each fold's test topics
are disjoint from its train topics by construction. Pair construction is
toolkit policy: positives come from authors with at least two documents in
scope (preferring cross-topic pairs when available), negatives pair distinct
authors, and the class balance follows the configured positive fraction
within one pair.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .errors import ConfigError, DataError, UnknownTopicError
from .topics import TopicRepresentation, cosine

SPLIT_SCHEMA = "split/v1"


@dataclass(frozen=True)
class SplitConfig:
    fold_count: int = 10
    pair_seed: int = 0
    positive_fraction: float = 0.5
    max_pairs_per_author: int | None = None
    prefer_cross_topic_positives: bool = True

    def __post_init__(self):
        if self.fold_count < 2:
            raise ConfigError(f"fold_count must be >= 2, got {self.fold_count}")
        if not (0.0 < self.positive_fraction < 1.0):
            raise ConfigError(
                f"positive_fraction must lie in (0, 1), got {self.positive_fraction}"
            )
        if self.max_pairs_per_author is not None and self.max_pairs_per_author < 1:
            raise ConfigError("max_pairs_per_author must be >= 1 or None")


@dataclass(frozen=True)
class VerificationPair:
    pair_id: str
    doc_a: str
    doc_b: str
    label: bool


@dataclass
class EvaluationSplit:
    fold_id: int
    train_topics: tuple[str, ...]
    test_topics: tuple[str, ...]
    train_pairs: list[VerificationPair]
    test_pairs: list[VerificationPair]


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def partition_topics(selected: Sequence[str], k: int, seed: int) -> list[list[str]]:
    """Split topics into k disjoint folds whose sizes differ by at most one."""
    ids = sorted(selected)
    if k > len(ids):
        raise ConfigError(f"cannot build k={k} folds from {len(ids)} topics")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    order = [ids[int(i)] for i in rng.permutation(len(ids))]
    base, extra = divmod(len(ids), k)
    folds, start = [], 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(order[start : start + size])
        start += size
    return folds


def _author_pairs(
    doc_ids: list[str],
    topics_of: Mapping[str, str],
    prefer_cross_topic: bool,
    cap: int | None,
    rng: np.random.Generator,
) -> list[tuple[str, str]]:
    docs = sorted(doc_ids)
    combos = [tuple(sorted(p)) for p in itertools.combinations(docs, 2)]
    if prefer_cross_topic:
        cross = [p for p in combos if topics_of[p[0]] != topics_of[p[1]]]
        same = [p for p in combos if topics_of[p[0]] == topics_of[p[1]]]
        pool = [cross[int(i)] for i in rng.permutation(len(cross))]
        pool += [same[int(i)] for i in rng.permutation(len(same))]
    else:
        pool = [combos[int(i)] for i in rng.permutation(len(combos))]
    return pool if cap is None else pool[:cap]


def generate_pairs(
    corpus: Corpus,
    topics: Sequence[str] | set[str],
    seed: int,
    config: SplitConfig,
) -> list[VerificationPair]:
    """Labeled same/different-author pairs over the given topic scope.

    Deterministic given (corpus, topics, seed, config); no duplicate
    unordered pairs; labels are consistent with the author index by
    construction.
    """
    topic_set = set(topics)
    if not topic_set:
        raise ConfigError("pair generation needs a nonempty topic scope")
    scope = [d for d in corpus.documents if d.topic_id in topic_set]
    if not scope:
        raise DataError("no documents in the requested topic scope")
    topics_of = {d.doc_id: d.topic_id for d in scope}
    authors_of = {d.doc_id: d.author_id for d in scope}
    by_author: dict[str, list[str]] = {}
    for d in scope:
        by_author.setdefault(d.author_id, []).append(d.doc_id)

    rng = np.random.default_rng(seed)

    positives: list[tuple[str, str]] = []
    for author in sorted(by_author):
        docs = by_author[author]
        if len(docs) < 2:
            continue
        positives.extend(
            _author_pairs(docs, topics_of, config.prefer_cross_topic_positives,
                          config.max_pairs_per_author, rng)
        )
    if not positives:
        raise DataError("no positive pairs available: no author has >= 2 documents in scope")

    n_docs = len(scope)
    n_neg_available = n_docs * (n_docs - 1) // 2 - sum(
        len(v) * (len(v) - 1) // 2 for v in by_author.values()
    )
    if n_neg_available == 0:
        raise DataError("no negative pairs available: all documents share one author")

    pf = config.positive_fraction
    n_pos = len(positives)
    n_neg = round(n_pos * (1.0 - pf) / pf)
    if n_neg > n_neg_available:
        n_neg = n_neg_available
        n_pos = min(n_pos, max(1, round(n_neg * pf / (1.0 - pf))))
        positives = [positives[int(i)] for i in rng.permutation(len(positives))][:n_pos]
    n_neg = max(1, n_neg)

    negatives = _sample_negatives(scope, authors_of, n_neg, rng)

    pairs = [(p, True) for p in sorted(positives)] + [(p, False) for p in sorted(negatives)]
    return [
        VerificationPair(f"p{i:06d}", a, b, lab) for i, ((a, b), lab) in enumerate(pairs)
    ]


def _sample_negatives(scope, authors_of, n_neg, rng) -> list[tuple[str, str]]:
    doc_ids = sorted(d.doc_id for d in scope)
    n = len(doc_ids)
    if n * (n - 1) // 2 <= 20000:
        candidates = [
            tuple(sorted((a, b)))
            for a, b in itertools.combinations(doc_ids, 2)
            if authors_of[a] != authors_of[b]
        ]
        order = rng.permutation(len(candidates))
        return [candidates[int(i)] for i in order[:n_neg]]
    # large scope: rejection sampling, falling back to enumeration if unlucky
    chosen: set[tuple[str, str]] = set()
    attempts = 0
    while len(chosen) < n_neg and attempts < 50 * n_neg:
        i, j = rng.integers(0, n, size=2)
        attempts += 1
        if i == j:
            continue
        a, b = sorted((doc_ids[int(i)], doc_ids[int(j)]))
        if authors_of[a] == authors_of[b] or (a, b) in chosen:
            continue
        chosen.add((a, b))
    if len(chosen) < n_neg:
        candidates = [
            tuple(sorted((a, b)))
            for a, b in itertools.combinations(doc_ids, 2)
            if authors_of[a] != authors_of[b] and tuple(sorted((a, b))) not in chosen
        ]
        order = rng.permutation(len(candidates))
        chosen.update(candidates[int(i)] for i in order[: n_neg - len(chosen)])
    return sorted(chosen)


def build_splits(
    corpus: Corpus, selected_topics: Sequence[str], config: SplitConfig
) -> list[EvaluationSplit]:
    """One split per fold: fold i is the test side, the rest is training.

    Pair RNG streams derive from (pair_seed, fold, side) so folds can be
    built in any order with identical results.
    """
    selected = sorted(set(selected_topics))
    unknown = [t for t in selected if t not in corpus.topic_index]
    if unknown:
        raise UnknownTopicError(f"selected topics not in corpus: {unknown[:5]}")
    folds = partition_topics(selected, config.fold_count, config.pair_seed)

    splits = []
    for fold_id, test_topics in enumerate(folds):
        train_topics = sorted(set(selected) - set(test_topics))
        train_pairs = generate_pairs(
            corpus, train_topics, _derived_seed(config.pair_seed, fold_id, 0), config
        )
        test_pairs = generate_pairs(
            corpus, test_topics, _derived_seed(config.pair_seed, fold_id, 1), config
        )
        splits.append(
            EvaluationSplit(
                fold_id=fold_id,
                train_topics=tuple(train_topics),
                test_topics=tuple(sorted(test_topics)),
                train_pairs=train_pairs,
                test_pairs=test_pairs,
            )
        )
    return splits


@dataclass(frozen=True)
class CrossTopicSimilarity:
    mean: float
    max: float


def split_topic_similarity(
    split: EvaluationSplit, topics: Sequence[TopicRepresentation]
) -> CrossTopicSimilarity:
    """Mean and max cosine over all (train topic, test topic) cross pairs."""
    vectors = {t.topic_id: t.vector for t in topics}
    missing = [t for t in (*split.train_topics, *split.test_topics) if t not in vectors]
    if missing:
        raise UnknownTopicError(f"no topic vector for {missing[0]!r}")
    sims = [
        cosine(vectors[tr], vectors[te])
        for tr in split.train_topics
        for te in split.test_topics
    ]
    return CrossTopicSimilarity(mean=sum(sims) / len(sims), max=max(sims))


def split_as_dict(split: EvaluationSplit) -> dict:
    return {
        "schema": SPLIT_SCHEMA,
        "fold_id": split.fold_id,
        "train_topics": list(split.train_topics),
        "test_topics": list(split.test_topics),
        "train_pairs": [[p.pair_id, p.doc_a, p.doc_b, p.label] for p in split.train_pairs],
        "test_pairs": [[p.pair_id, p.doc_a, p.doc_b, p.label] for p in split.test_pairs],
    }


def split_from_dict(data: dict) -> EvaluationSplit:
    return EvaluationSplit(
        fold_id=data["fold_id"],
        train_topics=tuple(data["train_topics"]),
        test_topics=tuple(data["test_topics"]),
        train_pairs=[VerificationPair(p[0], p[1], p[2], bool(p[3])) for p in data["train_pairs"]],
        test_pairs=[VerificationPair(p[0], p[1], p[2], bool(p[3])) for p in data["test_pairs"]],
    )


def save_split(split: EvaluationSplit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(split_as_dict(split), indent=2, sort_keys=True) + "\n", "utf-8")


def load_split(path: str | Path) -> EvaluationSplit:
    return split_from_dict(json.loads(Path(path).read_text("utf-8")))
