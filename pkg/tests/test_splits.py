from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from hitsbench.errors import ConfigError, DataError, UnknownTopicError
from hitsbench.splits import (
    SplitConfig,
    build_splits,
    generate_pairs,
    load_split,
    partition_topics,
    save_split,
    split_topic_similarity,
)
from hitsbench.synth import clustered_embedding_corpus
from hitsbench.topics import TopicRepresentation, build_topic_vectors, cosine

from conftest import make_corpus


def config(**kw) -> SplitConfig:
    defaults = dict(fold_count=2, pair_seed=0)
    defaults.update(kw)
    return SplitConfig(**defaults)


# ---------------------------------------------------------------- partition


def test_partition_seventy_topics_ten_folds():
    topics = [f"t{i:03d}" for i in range(70)]
    folds = partition_topics(topics, 10, seed=1)
    assert len(folds) == 10
    assert all(len(f) == 7 for f in folds)
    assert sorted(itertools.chain.from_iterable(folds)) == sorted(topics)


def test_partition_singletons_and_remainder():
    assert [len(f) for f in partition_topics([f"t{i}" for i in range(5)], 5, 0)] == [1] * 5
    sizes = sorted(len(f) for f in partition_topics([f"t{i}" for i in range(7)], 3, 0))
    assert sizes == [2, 2, 3]


def test_partition_deterministic_and_seed_sensitive():
    topics = [f"t{i}" for i in range(12)]
    assert partition_topics(topics, 4, 7) == partition_topics(topics, 4, 7)
    assert partition_topics(topics, 4, 7) != partition_topics(topics, 4, 8)


def test_partition_k_too_large():
    with pytest.raises(ConfigError):
        partition_topics(["a", "b"], 3, 0)


# ---------------------------------------------------------------- pairs


def pair_corpus():
    return make_corpus(
        [
            ("a1", "alice", "t1", "one"),
            ("a2", "alice", "t1", "two"),
            ("b1", "bob", "t1", "three"),
        ]
    )


def test_generate_pairs_minimal_counts():
    pairs = generate_pairs(pair_corpus(), {"t1"}, seed=0, config=config())
    assert sum(p.label for p in pairs) == 1
    assert sum(not p.label for p in pairs) == 1


def test_generate_pairs_no_negatives_error():
    corpus = make_corpus(
        [("a1", "alice", "t1", "one"), ("a2", "alice", "t1", "two")]
    )
    with pytest.raises(DataError, match="negative"):
        generate_pairs(corpus, {"t1"}, seed=0, config=config())


def test_generate_pairs_no_positives_error():
    corpus = make_corpus(
        [("a1", "alice", "t1", "one"), ("b1", "bob", "t1", "two")]
    )
    with pytest.raises(DataError, match="positive"):
        generate_pairs(corpus, {"t1"}, seed=0, config=config())


def big_random_corpus(seed=0, n_topics=6, n_authors=8, docs_per_author=4):
    rng = np.random.default_rng(seed)
    records = []
    for a in range(n_authors):
        for d in range(docs_per_author):
            t = int(rng.integers(n_topics))
            records.append((f"a{a}d{d}", f"auth{a}", f"t{t}", f"text {a} {d}"))
    return make_corpus(records)


def test_generate_pairs_label_recheck_oracle():
    corpus = big_random_corpus()
    pairs = generate_pairs(corpus, set(corpus.topic_index), seed=5, config=config())
    # independent pass over the author index
    authors = {d.doc_id: d.author_id for d in corpus.documents}
    for p in pairs:
        assert p.label == (authors[p.doc_a] == authors[p.doc_b])
        assert p.doc_a != p.doc_b


def test_generate_pairs_no_duplicates_and_balance():
    corpus = big_random_corpus(seed=3)
    for pf in (0.3, 0.5, 0.7):
        pairs = generate_pairs(
            corpus, set(corpus.topic_index), seed=1, config=config(positive_fraction=pf)
        )
        unordered = {tuple(sorted((p.doc_a, p.doc_b))) for p in pairs}
        assert len(unordered) == len(pairs)
        n_pos = sum(p.label for p in pairs)
        assert abs(n_pos - pf * len(pairs)) <= 1.0


def test_generate_pairs_deterministic():
    corpus = big_random_corpus(seed=4)
    a = generate_pairs(corpus, set(corpus.topic_index), seed=9, config=config())
    b = generate_pairs(corpus, set(corpus.topic_index), seed=9, config=config())
    assert a == b


def test_generate_pairs_author_cap():
    corpus = big_random_corpus(seed=6)
    pairs = generate_pairs(
        corpus, set(corpus.topic_index), seed=2, config=config(max_pairs_per_author=1)
    )
    per_author = {}
    authors = {d.doc_id: d.author_id for d in corpus.documents}
    for p in pairs:
        if p.label:
            per_author[authors[p.doc_a]] = per_author.get(authors[p.doc_a], 0) + 1
    assert all(v <= 1 for v in per_author.values())


def test_generate_pairs_prefers_cross_topic_positives():
    corpus = make_corpus(
        [
            ("a1", "alice", "t1", "one"),
            ("a2", "alice", "t1", "two"),
            ("a3", "alice", "t2", "three"),
            ("b1", "bob", "t1", "four"),
            ("b2", "bob", "t2", "five"),
        ]
    )
    topics_of = {d.doc_id: d.topic_id for d in corpus.documents}
    pairs = generate_pairs(
        corpus, {"t1", "t2"}, seed=0, config=config(max_pairs_per_author=1)
    )
    for p in pairs:
        if p.label:
            assert topics_of[p.doc_a] != topics_of[p.doc_b]


# ---------------------------------------------------------------- build_splits


def test_build_splits_two_folds_swap():
    corpus = big_random_corpus(seed=7, n_topics=4, n_authors=10, docs_per_author=5)
    topics = sorted(corpus.topic_index)
    splits = build_splits(corpus, topics, config(fold_count=2))
    assert len(splits) == 2
    assert set(splits[0].test_topics) == set(splits[1].train_topics)
    assert set(splits[1].test_topics) == set(splits[0].train_topics)


def test_build_splits_document_membership_audit():
    corpus = big_random_corpus(seed=8, n_topics=5, n_authors=12, docs_per_author=5)
    topics = sorted(corpus.topic_index)
    splits = build_splits(corpus, topics, config(fold_count=3))
    topic_of = {d.doc_id: d.topic_id for d in corpus.documents}
    for split in splits:
        assert not set(split.train_topics) & set(split.test_topics)
        train_docs = {d for p in split.train_pairs for d in (p.doc_a, p.doc_b)}
        test_docs = {d for p in split.test_pairs for d in (p.doc_a, p.doc_b)}
        assert not train_docs & test_docs
        assert all(topic_of[d] in split.train_topics for d in train_docs)
        assert all(topic_of[d] in split.test_topics for d in test_docs)


def test_build_splits_deterministic(tmp_path):
    corpus = big_random_corpus(seed=9, n_topics=4, n_authors=10, docs_per_author=5)
    topics = sorted(corpus.topic_index)
    s1 = build_splits(corpus, topics, config(fold_count=2, pair_seed=11))
    s2 = build_splits(corpus, topics, config(fold_count=2, pair_seed=11))
    for a, b in zip(s1, s2):
        save_split(a, tmp_path / "a.json")
        save_split(b, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_split_round_trip(tmp_path):
    corpus = big_random_corpus(seed=10, n_topics=4, n_authors=10, docs_per_author=5)
    splits = build_splits(corpus, sorted(corpus.topic_index), config(fold_count=2))
    path = tmp_path / "fold.json"
    save_split(splits[0], path)
    loaded = load_split(path)
    assert loaded.train_pairs == splits[0].train_pairs
    assert loaded.test_pairs == splits[0].test_pairs
    assert json.loads(path.read_text())["schema"] == "split/v1"


# ---------------------------------------------------------------- similarity


def reps(vectors, ids):
    return [TopicRepresentation(i, np.asarray(v, float), 1) for i, v in zip(ids, vectors)]


def make_split(train_topics, test_topics):
    from hitsbench.splits import EvaluationSplit

    return EvaluationSplit(0, tuple(train_topics), tuple(test_topics), [], [])


def test_split_similarity_identical_and_orthogonal():
    topics = reps([[1, 0], [1, 0]], ["tr", "te"])
    sim = split_topic_similarity(make_split(["tr"], ["te"]), topics)
    assert sim.mean == sim.max == pytest.approx(1.0, abs=1e-12)
    topics = reps([[1, 0], [0, 1]], ["tr", "te"])
    sim = split_topic_similarity(make_split(["tr"], ["te"]), topics)
    assert sim.mean == sim.max == 0.0


def test_split_similarity_matches_double_loop():
    rng = np.random.default_rng(31)
    ids = [f"t{i}" for i in range(7)]
    topics = reps(rng.normal(size=(7, 5)), ids)
    split = make_split(ids[:4], ids[4:])
    sim = split_topic_similarity(split, topics)
    vectors = {t.topic_id: t.vector for t in topics}
    sims = [
        cosine(vectors[a], vectors[b]) for a in ids[:4] for b in ids[4:]
    ]
    assert sim.mean == pytest.approx(sum(sims) / len(sims), abs=1e-12)
    assert sim.max == pytest.approx(max(sims), abs=1e-12)


def test_split_similarity_missing_vector():
    topics = reps([[1, 0]], ["tr"])
    with pytest.raises(UnknownTopicError):
        split_topic_similarity(make_split(["tr"], ["te"]), topics)


def test_hits_splits_less_similar_than_random():
    from hitsbench.sampler import hits_sample, random_sample

    wins = 0
    total = 0
    for seed in range(4):
        cc = clustered_embedding_corpus(seed=seed)
        topic_reps = build_topic_vectors(cc.embeddings, cc.corpus)
        hits = hits_sample(topic_reps, m=12)
        rand = random_sample([t.topic_id for t in topic_reps], 12, seed=seed)
        cfg = config(fold_count=4, pair_seed=seed)
        for h_split, r_split in zip(
            build_splits(cc.corpus, hits.selected_topics, cfg),
            build_splits(cc.corpus, rand.selected_topics, cfg),
        ):
            h = split_topic_similarity(h_split, topic_reps)
            r = split_topic_similarity(r_split, topic_reps)
            wins += int(h.mean < r.mean and h.max < r.max)
            total += 1
    assert wins / total >= 0.8
