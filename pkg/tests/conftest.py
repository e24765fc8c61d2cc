from __future__ import annotations

import numpy as np
import pytest

from hitsbench.corpus import Corpus, Document


def make_corpus(records: list[tuple[str, str, str, str]]) -> Corpus:
    return Corpus(Document(*r) for r in records)


@pytest.fixture
def tiny_corpus() -> Corpus:
    return make_corpus(
        [
            ("a1", "alice", "space", "the rocket and the moon"),
            ("a2", "alice", "space", "a moon base for the crew"),
            ("b1", "bob", "ocean", "the ship sails the sea"),
            ("b2", "bob", "space", "stars above the rocket"),
            ("c1", "carol", "ocean", "waves crash on the shore"),
        ]
    )


def random_prediction_arrays(rng: np.random.Generator, n: int, with_non_answers: bool = True):
    """Random scores/labels including exact 0.5 entries and ties."""
    scores = rng.choice(
        np.round(rng.uniform(0.0, 1.0, size=max(3, n // 3)), 3), size=n
    ).astype(float)
    if with_non_answers:
        mask = rng.random(n) < 0.15
        scores[mask] = 0.5
    labels = rng.random(n) < rng.uniform(0.2, 0.8)
    return scores, labels
