"""Ranking stability, topic-shortcut exposure and significance testing.

Model rankings per fold use tie-averaged ranks (rank 1 = best score).
Stability is the mean pairwise Spearman correlation of rankings across folds,
computed as Pearson on the rank vectors so ties are handled correctly. The
shortcut test ranks models by the absolute gap between their mean scores on
random-sampled and heterogeneity-sampled benchmarks (smaller gap = less
reliance on topic-specific features).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import stdtr

from .errors import ContractError, UndefinedMetricError
from .metrics import MetricReport
from .splits import EvaluationSplit
from .topics import TopicRepresentation, cosine


def rank_models(
    fold_reports: Mapping[str, MetricReport], metric: str
) -> dict[str, float]:
    """Descending-score ranks (1 = best); ties get the average position."""
    if len(fold_reports) < 2:
        raise ContractError("ranking needs at least 2 models")
    items = sorted(fold_reports.items(), key=lambda kv: (-kv[1].value(metric), kv[0]))
    ranks: dict[str, float] = {}
    i = 0
    while i < len(items):
        j = i
        while j + 1 < len(items) and items[j + 1][1].value(metric) == items[i][1].value(metric):
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[items[k][0]] = avg
        i = j + 1
    return ranks


def spearman(ranks_a: Mapping[str, float], ranks_b: Mapping[str, float]) -> float:
    """Pearson correlation of two tie-averaged rank vectors over one model set."""
    if set(ranks_a) != set(ranks_b):
        raise ContractError("rank vectors must cover the same model set")
    keys = sorted(ranks_a)
    if len(keys) < 2:
        raise ContractError("correlation needs at least 2 models")
    a = np.array([ranks_a[k] for k in keys], dtype=float)
    b = np.array([ranks_b[k] for k in keys], dtype=float)
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if denom == 0.0:
        raise UndefinedMetricError("Spearman undefined for a constant rank vector")
    return float(np.dot(da, db)) / denom


@dataclass
class StabilityReport:
    metrics: tuple[str, ...]
    pairwise: dict[str, np.ndarray]  # metric -> (folds, folds) correlation matrix
    mean_correlation: dict[str, float]
    grand_average: float

    def as_dict(self) -> dict:
        return {
            "schema": "stability/v1",
            "metrics": list(self.metrics),
            "pairwise": {m: mat.tolist() for m, mat in self.pairwise.items()},
            "mean_correlation": dict(self.mean_correlation),
            "grand_average": self.grand_average,
        }


def stability(
    fold_reports: Sequence[Mapping[str, MetricReport]],
    metrics: Sequence[str] = ("auc", "c@1", "f05u", "f1", "overall"),
) -> StabilityReport:
    """Mean pairwise Spearman across folds, per metric, plus the grand average."""
    n_folds = len(fold_reports)
    if n_folds < 2:
        raise ContractError("stability needs at least 2 folds")
    pairwise: dict[str, np.ndarray] = {}
    mean_corr: dict[str, float] = {}
    for metric in metrics:
        rankings = [rank_models(reports, metric) for reports in fold_reports]
        mat = np.eye(n_folds)
        values = []
        for i in range(n_folds):
            for j in range(i + 1, n_folds):
                r = spearman(rankings[i], rankings[j])
                mat[i, j] = mat[j, i] = r
                values.append(r)
        pairwise[metric] = mat
        mean_corr[metric] = sum(values) / len(values)
    grand = sum(mean_corr.values()) / len(mean_corr)
    return StabilityReport(
        metrics=tuple(metrics), pairwise=pairwise, mean_correlation=mean_corr, grand_average=grand
    )


@dataclass(frozen=True)
class ShortcutEntry:
    model: str
    score_random: float
    score_hits: float
    avg: float
    diff: float


@dataclass
class ShortcutReport:
    entries: list[ShortcutEntry]  # sorted by diff ascending (most robust first)

    def as_dict(self) -> dict:
        return {
            "schema": "shortcut/v1",
            "entries": [
                {
                    "model": e.model,
                    "score_random": e.score_random,
                    "score_hits": e.score_hits,
                    "avg": e.avg,
                    "diff": e.diff,
                }
                for e in self.entries
            ],
        }


def shortcut_test(
    hits_scores: Mapping[str, float], random_scores: Mapping[str, float]
) -> ShortcutReport:
    """Per-model average of and absolute gap between the two setups' scores."""
    if set(hits_scores) != set(random_scores):
        raise ContractError("shortcut test needs the same model set on both sides")
    if not hits_scores:
        raise ContractError("shortcut test needs at least one model")
    entries = [
        ShortcutEntry(
            model=m,
            score_random=random_scores[m],
            score_hits=hits_scores[m],
            avg=(random_scores[m] + hits_scores[m]) / 2.0,
            diff=abs(random_scores[m] - hits_scores[m]),
        )
        for m in sorted(hits_scores)
    ]
    entries.sort(key=lambda e: (e.diff, e.model))
    return ShortcutReport(entries=entries)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p_two_sided: float
    p_one_sided_less: float  # P(T <= t): small when sample_a is below sample_b
    df: float


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance t test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ContractError("both samples need size >= 2")
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        raise UndefinedMetricError("t test undefined: both samples have zero variance")
    na, nb = len(a), len(b)
    se2 = va / na + vb / nb
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    p_less = float(stdtr(df, t))
    p_two = 2.0 * min(p_less, 1.0 - p_less)
    return TTestResult(t=t, p_two_sided=p_two, p_one_sided_less=p_less, df=df)


@dataclass(frozen=True)
class CrossPairSimilarity:
    train_topic: str
    test_topic: str
    sim: float


def top_similar_cross_pairs(
    split: EvaluationSplit, topics: Sequence[TopicRepresentation], count: int
) -> list[CrossPairSimilarity]:
    """The count highest-similarity (train topic, test topic) pairs, descending."""
    vectors = {t.topic_id: t.vector for t in topics}
    pairs = [
        CrossPairSimilarity(tr, te, cosine(vectors[tr], vectors[te]))
        for tr in split.train_topics
        for te in split.test_topics
    ]
    pairs.sort(key=lambda p: (-p.sim, p.train_topic, p.test_topic))
    return pairs[: max(0, count)]
