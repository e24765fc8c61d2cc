"""Compression-based verifier: PPM cross-entropy features + logistic regression.

For a pair (text1, text2), a context model built from text1 scores text2 in
bits per byte and vice versa; the pair's features are the mean and the
absolute difference of the two cross-entropies (both symmetric in the pair).
A logistic regression over these features produces the same-author
probability, used directly as the prediction score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .._kernels import make_context_model
from ..corpus import Corpus
from ..errors import ConfigError, ContractError, TrainingError
from ..splits import VerificationPair
from .base import Prediction

DEFAULT_ORDER = 5


@dataclass(frozen=True)
class PPMConfig:
    order: int = DEFAULT_ORDER
    tol: float = 1e-8

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError(f"order must be >= 1, got {self.order}")


@dataclass
class PPMModel:
    order: int
    weights: np.ndarray  # [bias, w_mean, w_absdiff]

    def as_dict(self) -> dict:
        return {
            "schema": "ppm-model/v1",
            "order": self.order,
            "weights": [float(w) for w in self.weights],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PPMModel":
        return cls(order=data["order"], weights=np.asarray(data["weights"], dtype=float))


def ppm_cross_entropy(context_text: str, target_text: str, order: int = DEFAULT_ORDER) -> float:
    """Bits per byte of target_text under a model of context_text."""
    if not context_text:
        raise ContractError("context text must be nonempty")
    if not target_text:
        raise ContractError("target text must be nonempty")
    if order < 1:
        raise ContractError(f"order must be >= 1, got {order}")
    model = make_context_model(context_text.encode("utf-8"), order)
    return float(model.score(target_text.encode("utf-8")))


def pair_features(
    pairs: Sequence[VerificationPair],
    texts: Mapping[str, str],
    order: int,
    cache: dict | None = None,
) -> np.ndarray:
    """(n, 2) feature matrix: mean and absolute difference of cross-entropies.

    cache maps (doc_a, doc_b, order) with doc_a < doc_b to the (h_ab, h_ba)
    tuple; pass one dict across calls to reuse work between folds.
    """
    models: dict[str, object] = {}

    def model_for(doc_id: str):
        m = models.get(doc_id)
        if m is None:
            text = texts[doc_id]
            if not text:
                raise ContractError(f"document {doc_id!r} has empty text")
            m = make_context_model(text.encode("utf-8"), order)
            models[doc_id] = m
        return m

    features = np.empty((len(pairs), 2), dtype=float)
    for i, pair in enumerate(pairs):
        a, b = sorted((pair.doc_a, pair.doc_b))
        key = (a, b, order)
        if cache is not None and key in cache:
            h_ab, h_ba = cache[key]
        else:
            h_ab = model_for(a).score(texts[b].encode("utf-8"))
            h_ba = model_for(b).score(texts[a].encode("utf-8"))
            if cache is not None:
                cache[key] = (h_ab, h_ba)
        features[i, 0] = 0.5 * (h_ab + h_ba)
        features[i, 1] = abs(h_ab - h_ba)
    return features


def _design(features: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((len(features), 1)), features])


def logistic_nll(weights: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    z = X @ weights
    return float(np.sum(np.logaddexp(0.0, z) - y * z))


def logistic_grad(weights: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    z = X @ weights
    p = 1.0 / (1.0 + np.exp(-z))
    return X.T @ (p - y)


def fit_logistic(features: np.ndarray, labels: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Unregularized logistic fit, iterated until the loss gradient norm is small."""
    y = np.asarray(labels, dtype=float)
    if y.all() or not y.any():
        raise TrainingError("logistic regression needs both classes in the training labels")
    X = _design(np.asarray(features, dtype=float))
    result = minimize(
        logistic_nll,
        x0=np.zeros(X.shape[1]),
        args=(X, y),
        jac=logistic_grad,
        method="L-BFGS-B",
        options={"gtol": tol, "ftol": 0.0, "maxiter": 20000, "maxfun": 100000},
    )
    return result.x


def ppm_train(
    train_pairs: Sequence[VerificationPair],
    corpus: Corpus,
    config: PPMConfig | None = None,
    cache: dict | None = None,
) -> PPMModel:
    config = config or PPMConfig()
    if not train_pairs:
        raise TrainingError("no training pairs")
    features = pair_features(train_pairs, corpus.texts(), config.order, cache)
    labels = np.array([p.label for p in train_pairs], dtype=float)
    weights = fit_logistic(features, labels, tol=config.tol)
    return PPMModel(order=config.order, weights=weights)


def predict(
    model: PPMModel,
    pairs: Sequence[VerificationPair],
    corpus: Corpus,
    cache: dict | None = None,
) -> list[Prediction]:
    features = pair_features(pairs, corpus.texts(), model.order, cache)
    z = _design(features) @ model.weights
    probs = 1.0 / (1.0 + np.exp(-z))
    return [Prediction(p.pair_id, float(s)) for p, s in zip(pairs, probs)]
