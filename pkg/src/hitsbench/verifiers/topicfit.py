"""Topic-fit bias verifier: word unigrams over frequency-masked texts.

A deliberately topic-dependent model used to probe topic shortcuts. The top-k
most frequent word types in the training corpus (grammatical and other
topic-independent words) are masked with asterisk runs of equal length, so
only content words survive; the remainder runs through the same pipeline as
the n-gram baseline with word unigrams.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..corpus import Corpus
from ..errors import ConfigError, TrainingError
from ..splits import VerificationPair
from .base import Prediction
from .ngram import NGramConfig, NGramModel, predict_texts, train_ngram

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class TopicFitConfig:
    stoplist_size: int = 200
    vocab_size: int = 3000
    holdout_fraction: float = 0.1

    def __post_init__(self):
        if self.stoplist_size < 0:
            raise ConfigError(f"stoplist_size must be >= 0, got {self.stoplist_size}")


@dataclass
class TopicFitModel:
    stoplist: tuple[str, ...]
    inner: NGramModel

    def as_dict(self) -> dict:
        return {
            "schema": "topicfit-model/v1",
            "stoplist": list(self.stoplist),
            "inner": self.inner.as_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TopicFitModel":
        return cls(stoplist=tuple(data["stoplist"]), inner=NGramModel.from_dict(data["inner"]))


def build_stoplist(texts: Iterable[str], k: int) -> tuple[str, ...]:
    """Top-k most frequent lowercase word types; ties break lexicographically."""
    counts: dict[str, int] = {}
    for text in texts:
        for token in _WORD_RE.findall(text.lower()):
            counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    return tuple(t for t, _ in ranked)


def topicfit_mask(text: str, stoplist: Iterable[str]) -> str:
    """Replace each stoplisted token with an asterisk run of equal length.

    Whitespace and non-stoplist tokens are preserved verbatim; masking is
    idempotent because asterisk runs are never word tokens.
    """
    stopset = set(stoplist)

    def repl(match: re.Match) -> str:
        token = match.group(0)
        return "*" * len(token) if token.lower() in stopset else token

    return _WORD_RE.sub(repl, text)


def _masked_texts(texts: Mapping[str, str], stoplist: Iterable[str]) -> dict[str, str]:
    stopset = set(stoplist)
    return {doc_id: topicfit_mask(text, stopset) for doc_id, text in texts.items()}


def topicfit_train(
    train_pairs: Sequence[VerificationPair],
    corpus: Corpus,
    config: TopicFitConfig | None = None,
    seed: int = 0,
) -> TopicFitModel:
    config = config or TopicFitConfig()
    if not train_pairs:
        raise TrainingError("no training pairs")
    doc_ids = sorted({d for p in train_pairs for d in (p.doc_a, p.doc_b)})
    texts = corpus.texts()
    stoplist = build_stoplist((texts[d] for d in doc_ids), config.stoplist_size)
    masked = _masked_texts(texts, stoplist)
    authors_of = {d.doc_id: d.author_id for d in corpus.documents}
    inner_config = NGramConfig(
        n=1, vocab_size=config.vocab_size, unit="word", holdout_fraction=config.holdout_fraction
    )
    inner = train_ngram(train_pairs, masked, authors_of, inner_config, seed)
    return TopicFitModel(stoplist=stoplist, inner=inner)


def predict(
    model: TopicFitModel, pairs: Sequence[VerificationPair], corpus: Corpus
) -> list[Prediction]:
    masked = _masked_texts(corpus.texts(), model.stoplist)
    return predict_texts(model.inner, pairs, masked)
