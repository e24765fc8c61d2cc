"""Two-threshold score calibration and its grid search.

Raw similarity scores are min-max normalized to [0, 1] first. Calibration
then maps [0, p1] linearly onto [0, 0.49], the open band (p1, p2) to exactly
0.5 (a non-answer), and [p2, 1] linearly onto [0.51, 1]. The thresholds are
chosen by exhaustive search over a fixed percent grid, maximizing the overall
metric on held-out validation pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..errors import ConfigError, TrainingError

GRID = np.round(np.arange(0, 101) / 100.0, 2)


@dataclass(frozen=True)
class CalibrationParams:
    p1: float
    p2: float

    def __post_init__(self):
        if not (0.0 <= self.p1 <= self.p2 <= 1.0):
            raise ConfigError(f"need 0 <= p1 <= p2 <= 1, got p1={self.p1}, p2={self.p2}")


def normalize_scores(raws, lo: float, hi: float) -> np.ndarray:
    """Min-max normalize into [0, 1], clipping; a constant range maps to 0.5."""
    raws = np.asarray(raws, dtype=float)
    if hi > lo:
        return np.clip((raws - lo) / (hi - lo), 0.0, 1.0)
    return np.full_like(raws, 0.5)


def calibrate(raw: float, params: CalibrationParams) -> float:
    """Calibrate one normalized score; piecewise monotone non-decreasing."""
    raw = min(1.0, max(0.0, float(raw)))
    p1, p2 = params.p1, params.p2
    if p1 < raw < p2:
        return 0.5
    if raw == p1 == p2:
        return 0.5
    if raw <= p1:
        return 0.49 * raw / p1 if p1 > 0.0 else 0.49
    return 0.51 + 0.49 * (raw - p2) / (1.0 - p2) if p2 < 1.0 else 0.51


def calibrate_array(raws, params: CalibrationParams) -> np.ndarray:
    raws = np.clip(np.asarray(raws, dtype=float), 0.0, 1.0)
    return _calibrate_grid(raws, np.array([params.p1]), np.array([params.p2]))[0]


def _calibrate_grid(raws: np.ndarray, p1s: np.ndarray, p2s: np.ndarray) -> np.ndarray:
    """Calibrated scores for every (p1, p2) row; shape (len(p1s), len(raws))."""
    r = raws[None, :]
    p1 = p1s[:, None]
    p2 = p2s[:, None]
    left_val = np.where(p1 > 0.0, 0.49 * r / np.where(p1 > 0.0, p1, 1.0), 0.49)
    right_val = np.where(
        p2 < 1.0, 0.51 + 0.49 * (r - p2) / np.where(p2 < 1.0, 1.0 - p2, 1.0), 0.51
    )
    band = (p1 < r) & (r < p2)
    out = np.where(band, 0.5, np.where(r <= p1, left_val, right_val))
    collapsed = (p1 == p2) & (r == p1)
    return np.where(collapsed, 0.5, out)


def _overall_rows(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Overall metric per row of a (rows, n) calibrated-score matrix.

    Must agree with the metrics module; the grid-search oracle test rescans
    every grid point through metrics.report.
    """
    n = scores.shape[1]
    n_pos = int(labels.sum())
    n_neg = n - n_pos

    pos = labels[None, :]
    answered_pos = scores > 0.5
    answered_neg = scores < 0.5
    non_answer = scores == 0.5

    tp = (answered_pos & pos).sum(axis=1)
    fp = (answered_pos & ~pos).sum(axis=1)
    fn = (answered_neg & pos).sum(axis=1)
    n_u = non_answer.sum(axis=1)

    n_c = tp + (answered_neg & ~pos).sum(axis=1)
    c1 = (n_c + n_u * n_c / n) / n

    f05u = 1.25 * tp / (1.25 * tp + 0.25 * (fn + n_u) + fp)

    precision = np.divide(tp, tp + fp, out=np.zeros(len(tp)), where=(tp + fp) > 0)
    recall = np.divide(tp, tp + fn, out=np.zeros(len(tp)), where=(tp + fn) > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros(len(tp)), where=pr > 0)

    ranks = rankdata(scores, method="average", axis=1)
    auc = (ranks[:, labels].sum(axis=1) - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    return (auc + c1 + f05u + f1) / 4.0


def grid_search_calibration(labels, raw_scores) -> CalibrationParams:
    """Exhaustive (p1, p2) search maximizing overall on validation pairs.

    raw_scores must already be min-max normalized. Ties break toward the
    smaller band width, then the smaller p1.
    """
    labels = np.asarray(labels, dtype=bool)
    raws = np.asarray(raw_scores, dtype=float)
    if len(labels) == 0 or len(raws) == 0:
        raise TrainingError("calibration needs a nonempty validation set")
    if len(labels) != len(raws):
        raise TrainingError("labels and raw scores must align")
    if labels.all() or not labels.any():
        raise TrainingError("calibration validation pairs contain a single class")

    p1s, p2s = [], []
    for i, p1 in enumerate(GRID):
        for p2 in GRID[i:]:
            p1s.append(p1)
            p2s.append(p2)
    p1s = np.array(p1s)
    p2s = np.array(p2s)

    scores = _calibrate_grid(np.clip(raws, 0.0, 1.0), p1s, p2s)
    overall = _overall_rows(scores, labels)

    best = overall.max()
    tied = np.flatnonzero(overall == best)
    widths = p2s[tied] - p1s[tied]
    order = np.lexsort((p1s[tied], widths))
    pick = int(tied[order[0]])
    return CalibrationParams(p1=float(p1s[pick]), p2=float(p2s[pick]))
