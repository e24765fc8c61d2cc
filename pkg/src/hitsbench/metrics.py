"""Verification metrics: AUC, c@1, F0.5u, F1 and their mean ("overall").

Scores live in [0, 1]; a score of exactly 0.5 is a non-answer. AUC is computed
on the scores themselves (rank formulation, ties count 0.5); the other three
metrics classify first: > 0.5 positive, < 0.5 negative, == 0.5 non-answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ContractError, UndefinedMetricError

NON_ANSWER = 0.5


@dataclass(frozen=True)
class PredictionEntry:
    pair_id: str
    score: float
    label: bool


class PredictionSet:
    """Immutable set of scored, labeled pairs with unique pair ids."""

    def __init__(self, entries: Iterable[PredictionEntry]):
        entries = tuple(entries)
        if not entries:
            raise ContractError("prediction set must be nonempty")
        seen = set()
        for e in entries:
            if e.pair_id in seen:
                raise ContractError(f"duplicate pair_id {e.pair_id!r} in prediction set")
            seen.add(e.pair_id)
            if not (0.0 <= e.score <= 1.0):
                raise ContractError(f"score {e.score!r} for pair {e.pair_id!r} outside [0, 1]")
        self.entries = entries
        self.scores = np.array([e.score for e in entries], dtype=float)
        self.labels = np.array([e.label for e in entries], dtype=bool)

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_arrays(cls, scores, labels, pair_ids=None) -> "PredictionSet":
        scores = list(scores)
        if pair_ids is None:
            pair_ids = [f"p{i:06d}" for i in range(len(scores))]
        return cls(
            PredictionEntry(pid, float(s), bool(l))
            for pid, s, l in zip(pair_ids, scores, labels)
        )


@dataclass(frozen=True)
class MetricReport:
    auc: float
    c1: float
    f05u: float
    f1: float
    overall: float
    notes: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "auc": self.auc,
            "c@1": self.c1,
            "f05u": self.f05u,
            "f1": self.f1,
            "overall": self.overall,
            "notes": list(self.notes),
        }

    def value(self, metric: str) -> float:
        key = metric.lower()
        aliases = {"auc": "auc", "c@1": "c1", "c1": "c1", "f0.5u": "f05u",
                   "f05u": "f05u", "f1": "f1", "overall": "overall"}
        if key not in aliases:
            raise KeyError(f"unknown metric {metric!r}")
        return getattr(self, aliases[key])


METRIC_NAMES = ("auc", "c@1", "f05u", "f1", "overall")


def classify(score: float) -> str:
    """Map a score to 'positive', 'negative' or 'non-answer' (exactly 0.5)."""
    if not (0.0 <= score <= 1.0):
        raise ContractError(f"score {score!r} outside [0, 1]")
    if score > NON_ANSWER:
        return "positive"
    if score < NON_ANSWER:
        return "negative"
    return "non-answer"


def _rankdata_average(values: np.ndarray) -> np.ndarray:
    # tie-averaged ranks, 1-based
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    sorted_vals = values[order]
    i = 0
    n = len(values)
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        avg = 0.5 * (i + j) + 1.0
        ranks[order[i : j + 1]] = avg
        i = j + 1
    return ranks


def _auc(scores: np.ndarray, labels: np.ndarray) -> float:
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC undefined: predictions contain a single class")
    ranks = _rankdata_average(scores)
    pos_rank_sum = float(ranks[labels].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _c_at_1(scores: np.ndarray, labels: np.ndarray) -> float:
    n = len(scores)
    non_answer = scores == NON_ANSWER
    n_u = int(non_answer.sum())
    correct = ((scores > NON_ANSWER) & labels) | ((scores < NON_ANSWER) & ~labels)
    n_c = int(correct.sum())
    return (n_c + n_u * n_c / n) / n


def _f05u(scores: np.ndarray, labels: np.ndarray) -> float:
    # Non-answers are penalized like false negatives regardless of label,
    # matching the PAN verification evaluator.
    n_tp = int(((scores > NON_ANSWER) & labels).sum())
    n_fp = int(((scores > NON_ANSWER) & ~labels).sum())
    n_fn = int(((scores < NON_ANSWER) & labels).sum())
    n_u = int((scores == NON_ANSWER).sum())
    denom = 1.25 * n_tp + 0.25 * (n_fn + n_u) + n_fp
    if denom == 0:
        raise UndefinedMetricError("F0.5u undefined: no positives predicted or present")
    return 1.25 * n_tp / denom


def _f1(scores: np.ndarray, labels: np.ndarray) -> tuple[float, bool]:
    # Non-answers count as negative predictions: they can only hurt recall.
    pred_pos = scores > NON_ANSWER
    n_tp = int((pred_pos & labels).sum())
    n_fp = int((pred_pos & ~labels).sum())
    n_fn = int((~pred_pos & labels).sum())
    precision = n_tp / (n_tp + n_fp) if n_tp + n_fp > 0 else 0.0
    recall = n_tp / (n_tp + n_fn) if n_tp + n_fn > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0, True
    return 2.0 * precision * recall / (precision + recall), False


def auc(preds: PredictionSet) -> float:
    """Probability that a random positive outscores a random negative; ties 0.5."""
    return _auc(preds.scores, preds.labels)


def c_at_1(preds: PredictionSet) -> float:
    """(n_c + n_u * n_c / n) / n: accuracy crediting non-answers proportionally."""
    return _c_at_1(preds.scores, preds.labels)


def f05u(preds: PredictionSet) -> float:
    """Precision-weighted F measure (beta=0.5) treating non-answers as misses."""
    return _f05u(preds.scores, preds.labels)


def f1(preds: PredictionSet) -> float:
    """Harmonic mean of precision and recall for the positive class."""
    return _f1(preds.scores, preds.labels)[0]


def report(preds: PredictionSet) -> MetricReport:
    """All four metrics plus their arithmetic mean."""
    auc_v = _auc(preds.scores, preds.labels)
    c1_v = _c_at_1(preds.scores, preds.labels)
    f05u_v = _f05u(preds.scores, preds.labels)
    f1_v, f1_degenerate = _f1(preds.scores, preds.labels)
    notes = ("f1-zero-denominator",) if f1_degenerate else ()
    overall = (auc_v + c1_v + f05u_v + f1_v) / 4.0
    return MetricReport(auc=auc_v, c1=c1_v, f05u=f05u_v, f1=f1_v, overall=overall, notes=notes)
