from __future__ import annotations

import json

import numpy as np
import pytest

from hitsbench.errors import ConfigError, ContractError
from hitsbench.sampler import (
    SamplerConfig,
    group_unselected,
    hits_sample,
    init_seed_topic,
    leakage_score,
    load_sample,
    random_sample,
    run_sampler,
    save_sample,
)
from hitsbench.synth import clustered_embedding_corpus
from hitsbench.topics import (
    SimilarityMatrix,
    TopicRepresentation,
    build_topic_vectors,
    topic_similarity_matrix,
)


def matrix_from(values, ids=None) -> SimilarityMatrix:
    values = np.asarray(values, dtype=float)
    ids = ids or [f"t{i}" for i in range(len(values))]
    return SimilarityMatrix(tuple(ids), values)


def reps(vectors, ids=None) -> list[TopicRepresentation]:
    return [
        TopicRepresentation(ids[i] if ids else f"t{i}", np.asarray(v, dtype=float), 1)
        for i, v in enumerate(vectors)
    ]


# --------------------------------------------------------------- oracles


def oracle_leakage(sims) -> float:
    return (sum(sims) / len(sims)) * max(sims)


def oracle_greedy(matrix: SimilarityMatrix, m: int) -> list[str]:
    """Independent greedy replay: recompute each step from scratch."""
    ids = list(matrix.topic_ids)
    n = len(ids)
    means = [
        sum(matrix.values[i, j] for j in range(n) if j != i) / (n - 1) for i in range(n)
    ]
    seed = min(range(n), key=lambda i: (means[i], ids[i]))
    selected = [seed]
    while len(selected) < m:
        best = None
        for i in range(n):
            if i in selected:
                continue
            sims = [matrix.values[i, j] for j in selected]
            score = oracle_leakage(sims)
            key = (score, ids[i])
            if best is None or key < best[0]:
                best = (key, i)
        selected.append(best[1])
    return [ids[i] for i in selected]


# --------------------------------------------------------------- seed topic


def test_seed_topic_forced_by_definition():
    # A orthogonal to B and C; sim(B, C) = 0.9 -> A has the lowest mean
    m = matrix_from([[1, 0, 0], [0, 1, 0.9], [0, 0.9, 1]], ids=["A", "B", "C"])
    assert init_seed_topic(m) == "A"


def test_seed_topic_tie_breaks_lexicographically():
    m = matrix_from([[1, 0.5, 0.5], [0.5, 1, 0.5], [0.5, 0.5, 1]], ids=["c", "a", "b"])
    assert init_seed_topic(m) == "a"


def test_seed_topic_matches_row_mean_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.uniform(-1, 1, size=(6, 6))
        v = (v + v.T) / 2
        np.fill_diagonal(v, 1.0)
        m = matrix_from(v)
        means = [
            sum(v[i, j] for j in range(6) if j != i) / 5 for i in range(6)
        ]
        expected = min(range(6), key=lambda i: (means[i], m.topic_ids[i]))
        assert init_seed_topic(m) == m.topic_ids[expected]


# --------------------------------------------------------------- leakage score


def test_leakage_score_examples():
    assert leakage_score([0.5, 0.9]) == pytest.approx(0.63, abs=1e-12)
    assert leakage_score([0.4]) == pytest.approx(0.16, abs=1e-12)  # singleton: s^2
    assert leakage_score([0.0, 0.0, 0.0]) == 0.0


def test_leakage_score_empty_error():
    with pytest.raises(ContractError):
        leakage_score([])


# --------------------------------------------------------------- hits_sample


def test_hits_exhaustion_selects_all():
    rng = np.random.default_rng(4)
    topics = reps(rng.normal(size=(5, 8)))
    result = hits_sample(topics, m=5)
    assert sorted(result.selected_topics) == [t.topic_id for t in topics]
    assert len(result.selection_trace) == 5


def test_hits_near_duplicates_avoided():
    # two near-duplicates plus two mutually orthogonal topics, m=3:
    # at most one of the near-duplicate pair gets selected
    topics = reps(
        [[1.0, 0.0, 0.0], [0.999, 0.0447, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        ids=["dup1", "dup2", "free1", "free2"],
    )
    matrix = topic_similarity_matrix(topics)
    assert matrix.sim("dup1", "dup2") > 0.99
    result = hits_sample(topics, m=3)
    assert oracle_greedy(matrix, 3) == result.selected_topics
    assert not {"dup1", "dup2"} <= set(result.selected_topics)


def test_hits_m2_second_pick_brute_force():
    rng = np.random.default_rng(8)
    for _ in range(20):
        vecs = rng.normal(size=(7, 5)) + 0.8  # bias positive -> nonnegative sims mostly
        topics = reps(vecs)
        matrix = topic_similarity_matrix(topics)
        result = hits_sample(topics, m=2)
        seed_id = result.selected_topics[0]
        # brute force: argmin of sim(candidate, seed)^2 = leakage of singleton set
        best = min(
            (t for t in matrix.topic_ids if t != seed_id),
            key=lambda t: (oracle_leakage([matrix.sim(t, seed_id)]), t),
        )
        assert result.selected_topics[1] == best


def test_hits_greedy_replay_property():
    rng = np.random.default_rng(12)
    for _ in range(10):
        vecs = rng.normal(size=(12, 6))
        topics = reps(vecs)
        matrix = topic_similarity_matrix(topics)
        result = hits_sample(topics, m=8)
        assert result.selected_topics == oracle_greedy(matrix, 8)
        # each recorded score beats every unselected candidate at that step
        for step, entry in enumerate(result.selection_trace):
            if step == 0:
                continue
            selected_before = result.selected_topics[:step]
            chosen_score = oracle_leakage(
                [matrix.sim(entry.topic_id, s) for s in selected_before]
            )
            assert chosen_score == pytest.approx(entry.score, abs=1e-9)
            for other in matrix.topic_ids:
                if other in selected_before or other == entry.topic_id:
                    continue
                other_score = oracle_leakage(
                    [matrix.sim(other, s) for s in selected_before]
                )
                assert chosen_score <= other_score + 1e-12


def test_hits_deterministic_byte_identical(tmp_path):
    corpus = clustered_embedding_corpus(seed=0)
    topics = build_topic_vectors(corpus.embeddings, corpus.corpus)
    r1 = hits_sample(topics, m=10)
    r2 = hits_sample(topics, m=10)
    p1, p2 = tmp_path / "s1.json", tmp_path / "s2.json"
    save_sample(r1, p1)
    save_sample(r2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_hits_m_too_large():
    topics = reps(np.eye(3))
    with pytest.raises(ConfigError):
        hits_sample(topics, m=4)


def test_hits_planted_pairs_never_complete():
    corpus = clustered_embedding_corpus(seed=1)
    topics = build_topic_vectors(corpus.embeddings, corpus.corpus)
    result = hits_sample(topics, m=12)
    chosen = set(result.selected_topics)
    for a, b in corpus.planted_pairs:
        assert not {a, b} <= chosen


# --------------------------------------------------------------- random_sample


def test_random_sample_deterministic():
    ids = [f"t{i}" for i in range(10)]
    r1 = random_sample(ids, 4, seed=42)
    r2 = random_sample(ids, 4, seed=42)
    assert r1.selected_topics == r2.selected_topics
    assert r1.selection_trace == []


def test_random_sample_full_set():
    ids = ["b", "a", "c"]
    r = random_sample(ids, 3, seed=0)
    assert sorted(r.selected_topics) == ["a", "b", "c"]


def test_random_sample_uniform_frequencies():
    ids = ["a", "b", "c", "d"]
    counts = {t: 0 for t in ids}
    for seed in range(10_000):
        pick = random_sample(ids, 1, seed=seed).selected_topics[0]
        counts[pick] += 1
    for t in ids:
        assert 0.22 <= counts[t] / 10_000 <= 0.28


def test_random_sample_distinct_seeds_mostly_differ():
    ids = [f"t{i}" for i in range(20)]
    picks = {tuple(sorted(random_sample(ids, 10, seed=s).selected_topics)) for s in range(30)}
    assert len(picks) >= 28


# --------------------------------------------------------------- grouping


def test_grouping_identical_topic_maps_to_it():
    topics = reps(
        [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        ids=["A", "dupA", "B"],
    )
    result = hits_sample(topics, m=2)
    assert set(result.selected_topics) == {"A", "B"} or set(result.selected_topics) == {"dupA", "B"}
    grouped = group_unselected(topics, result)
    (unselected,) = [t for t in ("A", "dupA") if t not in result.selected_topics]
    target = "A" if unselected == "dupA" else "dupA"
    assert grouped.grouping_map == {unselected: target}
    assert grouped.method == "hits-grouping"


def test_grouping_tie_breaks_to_smaller_id():
    topics = reps(
        [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        ids=["a", "b", "mid"],
    )
    result = hits_sample(topics, m=2)
    assert set(result.selected_topics) == {"a", "b"}
    grouped = group_unselected(topics, result)
    assert grouped.grouping_map == {"mid": "a"}  # equidistant -> smaller id


def test_grouping_matches_nearest_oracle():
    rng = np.random.default_rng(21)
    vecs = rng.normal(size=(12, 6))
    topics = reps(vecs)
    matrix = topic_similarity_matrix(topics)
    result = hits_sample(topics, m=5)
    grouped = group_unselected(topics, result)
    selected = set(result.selected_topics)
    assert set(grouped.grouping_map) == set(matrix.topic_ids) - selected
    for t, target in grouped.grouping_map.items():
        best = max(sorted(selected), key=lambda s: matrix.sim(t, s))
        assert target == best


# --------------------------------------------------------------- config / io


def test_sampler_config_validation():
    with pytest.raises(ConfigError):
        SamplerConfig(method="bogus", m=5)
    with pytest.raises(ConfigError):
        SamplerConfig(method="random", m=1)


def test_run_sampler_dispatch_and_round_trip(tmp_path):
    corpus = clustered_embedding_corpus(seed=2)
    topics = build_topic_vectors(corpus.embeddings, corpus.corpus)
    for method in ("hits-cutting", "hits-grouping", "random"):
        result = run_sampler(topics, SamplerConfig(method=method, m=6, seed=3))
        assert result.method == method
        assert len(result.selected_topics) == 6
        assert (result.grouping_map is not None) == (method == "hits-grouping")
        path = tmp_path / f"{method}.json"
        save_sample(result, path)
        loaded = load_sample(path)
        assert loaded.selected_topics == result.selected_topics
        assert loaded.grouping_map == result.grouping_map
        data = json.loads(path.read_text())
        assert data["schema"] == "sample/v1"
