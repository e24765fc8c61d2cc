"""Topic subset selection: greedy heterogeneity-informed sampling (HITS) or random.

The greedy sampler seeds with the topic least similar on average to all
others, then repeatedly adds the candidate with the lowest leakage score
against the already-selected set, where the leakage score of a candidate is

    mean(similarities to selected) * max(similarities to selected).

Scores are recomputed every iteration; ties break on lexicographic topic id
so results are fully deterministic. The grouping variant afterwards assigns
every unselected topic to its most similar selected topic instead of
discarding it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, ContractError
from .topics import SimilarityMatrix, TopicRepresentation, topic_similarity_matrix

SAMPLE_SCHEMA = "sample/v1"
METHODS = ("hits-cutting", "hits-grouping", "random")


@dataclass(frozen=True)
class SamplerConfig:
    method: str
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown sampling method {self.method!r}; expected one of {METHODS}")
        if self.m < 2:
            raise ConfigError(f"target topic count m must be >= 2, got {self.m}")


@dataclass(frozen=True)
class TraceEntry:
    step: int
    topic_id: str
    score: float


@dataclass
class SampleResult:
    method: str
    m: int
    selected_topics: list[str]
    selection_trace: list[TraceEntry] = field(default_factory=list)
    seed: int | None = None
    grouping_map: dict[str, str] | None = None

    def as_dict(self) -> dict:
        return {
            "schema": SAMPLE_SCHEMA,
            "method": self.method,
            "m": self.m,
            "seed": self.seed,
            "selected_topics": list(self.selected_topics),
            "selection_trace": [
                {"step": t.step, "topic_id": t.topic_id, "score": t.score}
                for t in self.selection_trace
            ],
            "grouping_map": dict(sorted(self.grouping_map.items())) if self.grouping_map else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleResult":
        return cls(
            method=data["method"],
            m=data["m"],
            selected_topics=list(data["selected_topics"]),
            selection_trace=[
                TraceEntry(t["step"], t["topic_id"], t["score"]) for t in data["selection_trace"]
            ],
            seed=data.get("seed"),
            grouping_map=data.get("grouping_map"),
        )


def save_sample(result: SampleResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result.as_dict(), indent=2, sort_keys=True) + "\n", "utf-8")


def load_sample(path: str | Path) -> SampleResult:
    return SampleResult.from_dict(json.loads(Path(path).read_text("utf-8")))


def mean_offdiagonal_similarity(matrix: SimilarityMatrix) -> np.ndarray:
    """Per-topic mean similarity to every other topic (diagonal excluded)."""
    n = len(matrix.topic_ids)
    return (matrix.values.sum(axis=1) - np.diag(matrix.values)) / (n - 1)


def _argmin_with_tie_break(scores: np.ndarray, topic_ids: Sequence[str]) -> int:
    best = scores.min()
    tied = [i for i in np.flatnonzero(scores == best)]
    return min(tied, key=lambda i: topic_ids[i])


def init_seed_topic(matrix: SimilarityMatrix) -> str:
    """Topic with the lowest mean similarity to all other topics."""
    if len(matrix.topic_ids) < 2:
        raise ConfigError("seed selection needs at least 2 topics")
    means = mean_offdiagonal_similarity(matrix)
    return matrix.topic_ids[_argmin_with_tie_break(means, matrix.topic_ids)]


def leakage_score(sims: Sequence[float]) -> float:
    """mean(S) * max(S) over a candidate's similarities to selected topics."""
    sims = list(sims)
    if not sims:
        raise ContractError("leakage score undefined on an empty similarity set")
    if not all(np.isfinite(sims)):
        raise ContractError("leakage score undefined on non-finite similarities")
    return (sum(sims) / len(sims)) * max(sims)


def hits_sample(
    topics: Sequence[TopicRepresentation] | SimilarityMatrix, m: int
) -> SampleResult:
    """Greedy selection of m mutually dissimilar topics.

    Accepts either topic representations (the similarity matrix is built
    internally) or a prebuilt SimilarityMatrix.
    """
    matrix = topics if isinstance(topics, SimilarityMatrix) else topic_similarity_matrix(topics)
    ids = matrix.topic_ids
    n = len(ids)
    if m > n:
        raise ConfigError(f"cannot select m={m} topics from {n} available")
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")

    values = matrix.values
    seed_means = mean_offdiagonal_similarity(matrix)
    seed_idx = _argmin_with_tie_break(seed_means, ids)

    selected = [seed_idx]
    trace = [TraceEntry(0, ids[seed_idx], float(seed_means[seed_idx]))]
    remaining = sorted(set(range(n)) - {seed_idx})

    for step in range(1, m):
        # similarities of every candidate to the current selection, in
        # selection order so the recorded scores replay exactly
        block = values[np.ix_(remaining, selected)]
        scores = block.mean(axis=1) * block.max(axis=1)
        local = _argmin_with_tie_break(scores, [ids[i] for i in remaining])
        pick = remaining[local]
        trace.append(TraceEntry(step, ids[pick], float(scores[local])))
        selected.append(pick)
        remaining.pop(local)

    return SampleResult(
        method="hits-cutting",
        m=m,
        selected_topics=[ids[i] for i in selected],
        selection_trace=trace,
    )


def random_sample(topic_ids: Sequence[str], m: int, seed: int) -> SampleResult:
    """Uniform sample of m topics without replacement, reproducible from seed."""
    ids = sorted(topic_ids)
    if m > len(ids):
        raise ConfigError(f"cannot select m={m} topics from {len(ids)} available")
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(ids), size=m, replace=False)
    return SampleResult(
        method="random",
        m=m,
        selected_topics=[ids[int(i)] for i in chosen],
        selection_trace=[],
        seed=seed,
    )


def group_unselected(
    topics: Sequence[TopicRepresentation], result: SampleResult
) -> SampleResult:
    """Assign each unselected topic to its most similar selected topic.

    Ties break toward the lexicographically smaller selected id. Returns a
    new result with method 'hits-grouping'; downstream corpora should relabel
    merged documents to the target topic id.
    """
    matrix = topic_similarity_matrix(topics)
    selected = list(result.selected_topics)
    selected_set = set(selected)
    unselected = sorted(t for t in matrix.topic_ids if t not in selected_set)

    sel_order = sorted(selected)
    sel_idx = [matrix.index(t) for t in sel_order]
    grouping: dict[str, str] = {}
    for topic in unselected:
        row = matrix.values[matrix.index(topic), sel_idx]
        best = int(np.argmax(row))  # first max in lexicographic selected order
        grouping[topic] = sel_order[best]

    return SampleResult(
        method="hits-grouping",
        m=result.m,
        selected_topics=list(result.selected_topics),
        selection_trace=list(result.selection_trace),
        seed=result.seed,
        grouping_map=grouping,
    )


def run_sampler(
    topics: Sequence[TopicRepresentation], config: SamplerConfig
) -> SampleResult:
    """Dispatch on the configured method."""
    if config.method == "random":
        return random_sample([t.topic_id for t in topics], config.m, config.seed)
    result = hits_sample(topics, config.m)
    if config.method == "hits-grouping":
        result = group_unselected(topics, result)
    return result
