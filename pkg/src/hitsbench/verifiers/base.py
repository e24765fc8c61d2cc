"""Shared prediction record for all verifiers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Prediction:
    pair_id: str
    score: float
