"""N-gram cosine verifier with two-threshold calibration.

Documents become L2-normalized term-frequency vectors over a vocabulary of
the most frequent n-grams in the training documents; a pair's raw score is
the cosine of its two vectors. Units are characters (the classic baseline,
n=4) or word tokens (used by the topic-fit model with n=1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..corpus import Corpus
from ..errors import ConfigError, TrainingError
from ..splits import VerificationPair
from ..topics import tokenize
from .base import Prediction
from .calibration import (
    CalibrationParams,
    calibrate,
    grid_search_calibration,
    normalize_scores,
)

UNITS = ("character", "word")


@dataclass(frozen=True)
class NGramConfig:
    n: int = 4
    vocab_size: int = 3000
    unit: str = "character"
    holdout_fraction: float = 0.1

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.vocab_size < 1:
            raise ConfigError(f"vocab_size must be >= 1, got {self.vocab_size}")
        if self.unit not in UNITS:
            raise ConfigError(f"unit must be one of {UNITS}, got {self.unit!r}")


@dataclass
class NGramModel:
    config: NGramConfig
    vocabulary: tuple[str, ...]
    frequencies: tuple[int, ...]
    calibration: CalibrationParams
    score_lo: float
    score_hi: float
    _index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self._index:
            self._index = {g: i for i, g in enumerate(self.vocabulary)}

    def as_dict(self) -> dict:
        return {
            "schema": "ngram-model/v1",
            "config": {
                "n": self.config.n,
                "vocab_size": self.config.vocab_size,
                "unit": self.config.unit,
            },
            "vocabulary": list(self.vocabulary),
            "frequencies": list(self.frequencies),
            "calibration": {"p1": self.calibration.p1, "p2": self.calibration.p2},
            "score_lo": self.score_lo,
            "score_hi": self.score_hi,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NGramModel":
        cfg = data["config"]
        return cls(
            config=NGramConfig(n=cfg["n"], vocab_size=cfg["vocab_size"], unit=cfg["unit"]),
            vocabulary=tuple(data["vocabulary"]),
            frequencies=tuple(data["frequencies"]),
            calibration=CalibrationParams(**data["calibration"]),
            score_lo=data["score_lo"],
            score_hi=data["score_hi"],
        )


@dataclass(frozen=True)
class RawScore:
    value: float
    degenerate: bool  # one of the documents had zero in-vocabulary mass


def extract_ngrams(text: str, n: int, unit: str) -> list[str]:
    if unit == "character":
        return [text[i : i + n] for i in range(len(text) - n + 1)]
    tokens = tokenize(text)
    if n == 1:
        return tokens
    return [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def build_vocabulary(
    texts: Sequence[str], config: NGramConfig
) -> tuple[tuple[str, ...], tuple[int, ...]]:
    """Top vocab_size n-grams by total frequency; ties break lexicographically."""
    counts: dict[str, int] = {}
    for text in texts:
        for gram in extract_ngrams(text, config.n, config.unit):
            counts[gram] = counts.get(gram, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[: config.vocab_size]
    if not ranked:
        raise TrainingError("no n-grams extractable from the training documents")
    return tuple(g for g, _ in ranked), tuple(c for _, c in ranked)


def _doc_vector(model: NGramModel, text: str) -> np.ndarray | None:
    vec = np.zeros(len(model.vocabulary), dtype=float)
    idx = model._index
    for gram in extract_ngrams(text, model.config.n, model.config.unit):
        pos = idx.get(gram)
        if pos is not None:
            vec[pos] += 1.0
    norm = math.sqrt(float(np.dot(vec, vec)))
    if norm == 0.0:
        return None
    return vec / norm


def raw_score_texts(model: NGramModel, text_a: str, text_b: str) -> RawScore:
    va = _doc_vector(model, text_a)
    vb = _doc_vector(model, text_b)
    if va is None or vb is None:
        return RawScore(0.0, True)
    return RawScore(float(np.dot(va, vb)), False)


def raw_score(model: NGramModel, pair: VerificationPair, corpus: Corpus) -> RawScore:
    return raw_score_texts(model, corpus.doc(pair.doc_a).text, corpus.doc(pair.doc_b).text)


def _holdout_split(
    pairs: Sequence[VerificationPair],
    authors_of: Mapping[str, str],
    fraction: float,
    rng: np.random.Generator,
) -> list[int]:
    """Indices of validation pairs: held out by author, with a stratified
    fallback when the author split leaves the validation side unusable."""
    authors = sorted({authors_of[p.doc_a] for p in pairs})
    n_val_authors = max(1, round(fraction * len(authors)))
    order = rng.permutation(len(authors))
    val_authors = {authors[int(i)] for i in order[:n_val_authors]}
    val_idx = [i for i, p in enumerate(pairs) if authors_of[p.doc_a] in val_authors]

    labels = [pairs[i].label for i in val_idx]
    if len(val_idx) >= 4 and any(labels) and not all(labels):
        return val_idx

    # fallback: stratified sample over pairs
    pos = [i for i, p in enumerate(pairs) if p.label]
    neg = [i for i, p in enumerate(pairs) if not p.label]
    if not pos or not neg:
        raise TrainingError("training pairs contain a single class; cannot calibrate")
    take_pos = max(2, round(fraction * len(pos)))
    take_neg = max(2, round(fraction * len(neg)))
    pos_sel = [pos[int(i)] for i in rng.permutation(len(pos))[:take_pos]]
    neg_sel = [neg[int(i)] for i in rng.permutation(len(neg))[:take_neg]]
    return sorted(pos_sel + neg_sel)


def train_ngram(
    pairs: Sequence[VerificationPair],
    texts: Mapping[str, str],
    authors_of: Mapping[str, str],
    config: NGramConfig,
    seed: int = 0,
) -> NGramModel:
    """Fit vocabulary on the training documents and calibrate thresholds on a
    held-out slice of the training pairs."""
    if not pairs:
        raise TrainingError("no training pairs")
    doc_ids = sorted({d for p in pairs for d in (p.doc_a, p.doc_b)})
    missing = [d for d in doc_ids if d not in texts]
    if missing:
        raise TrainingError(f"missing text for document {missing[0]!r}")
    vocabulary, frequencies = build_vocabulary([texts[d] for d in doc_ids], config)

    model = NGramModel(
        config=config,
        vocabulary=vocabulary,
        frequencies=frequencies,
        calibration=CalibrationParams(0.0, 0.0),
        score_lo=0.0,
        score_hi=1.0,
    )

    raws = np.array(
        [raw_score_texts(model, texts[p.doc_a], texts[p.doc_b]).value for p in pairs]
    )
    lo, hi = float(raws.min()), float(raws.max())

    rng = np.random.default_rng(seed)
    val_idx = _holdout_split(pairs, authors_of, config.holdout_fraction, rng)
    val_labels = np.array([pairs[i].label for i in val_idx], dtype=bool)
    val_raws = normalize_scores(raws[val_idx], lo, hi)
    params = grid_search_calibration(val_labels, val_raws)

    model.calibration = params
    model.score_lo = lo
    model.score_hi = hi
    return model


def char_ngram_train(
    train_pairs: Sequence[VerificationPair],
    corpus: Corpus,
    config: NGramConfig | None = None,
    seed: int = 0,
) -> NGramModel:
    config = config or NGramConfig()
    authors_of = {d.doc_id: d.author_id for d in corpus.documents}
    return train_ngram(train_pairs, corpus.texts(), authors_of, config, seed)


def predict_texts(
    model: NGramModel, pairs: Sequence[VerificationPair], texts: Mapping[str, str]
) -> list[Prediction]:
    preds = []
    for pair in pairs:
        raw = raw_score_texts(model, texts[pair.doc_a], texts[pair.doc_b]).value
        normalized = float(normalize_scores([raw], model.score_lo, model.score_hi)[0])
        preds.append(Prediction(pair.pair_id, calibrate(normalized, model.calibration)))
    return preds


def predict(
    model: NGramModel, pairs: Sequence[VerificationPair], corpus: Corpus
) -> list[Prediction]:
    return predict_texts(model, pairs, corpus.texts())
