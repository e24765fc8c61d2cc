"""Pure-Python PPM context model (method C escapes, byte alphabet).

Semantics must match the compiled kernel in _ppm_cy.pyx exactly: counts are
collected over all context orders 0..order from one text, and scoring walks
the escape chain per target byte without updating the model. Contexts the
model never saw are skipped at no cost; a context that exists but lacks the
symbol charges the escape probability d / (total + d) before dropping an
order; a symbol unmatched even at order 0 falls back to a uniform 1/256.
"""

from __future__ import annotations

from math import log2


def _key(data, pos: int, k: int):
    if k <= 7:
        key = k << 56
        for i in range(k):
            key |= data[pos - k + i] << (8 * i)
        return key
    return (k, bytes(data[pos - k : pos]))


class ContextModel:
    __slots__ = ("order", "_counts", "_totals")

    def __init__(self, text: bytes, order: int):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if len(text) == 0:
            raise ValueError("context text must be nonempty")
        self.order = order
        counts: dict = {}
        totals: dict = {}
        n = len(text)
        for pos in range(n):
            sym = text[pos]
            kmax = order if pos >= order else pos
            for k in range(kmax + 1):
                key = _key(text, pos, k)
                inner = counts.get(key)
                if inner is None:
                    counts[key] = {sym: 1}
                    totals[key] = 1
                else:
                    inner[sym] = inner.get(sym, 0) + 1
                    totals[key] += 1
        self._counts = counts
        self._totals = totals

    def score(self, target: bytes) -> float:
        """Average bits per byte of target under the frozen model."""
        if len(target) == 0:
            raise ValueError("target text must be nonempty")
        counts = self._counts
        totals = self._totals
        order = self.order
        total_bits = 0.0
        n = len(target)
        for pos in range(n):
            sym = target[pos]
            logp = 0.0
            matched = False
            kmax = order if pos >= order else pos
            for k in range(kmax, -1, -1):
                key = _key(target, pos, k)
                inner = counts.get(key)
                if inner is None:
                    continue
                denom = totals[key] + len(inner)
                cnt = inner.get(sym)
                if cnt is not None:
                    logp += log2(cnt / denom)
                    matched = True
                    break
                logp += log2(len(inner) / denom)
            if not matched:
                logp += -8.0  # log2(1/256)
            total_bits -= logp
        return total_bits / n
