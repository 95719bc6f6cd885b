"""Similarity primitives shared by clustering and collaborative filtering:
cosine similarity, Shannon entropy, rating differences and the weighted
difference entropy (WDE) with its min-max normalization (NWDE).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EmptyCommonSet, LengthMismatch, NotADistribution, ZeroVector

DIST_TOL = 1e-9


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    if len(u) != len(v):
        raise LengthMismatch(f"vectors have lengths {len(u)} and {len(v)}")
    nu = math.sqrt(math.fsum(x * x for x in u))
    nv = math.sqrt(math.fsum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    sim = math.fsum(x * y for x, y in zip(u, v)) / (nu * nv)
    # rounding can push |sim| a hair past 1
    return max(-1.0, min(1.0, sim))


def cosine_distance(u: Sequence[float], v: Sequence[float]) -> float:
    return 1.0 - cosine_similarity(u, v)


def shannon_entropy(probabilities: Sequence[float]) -> float:
    """Entropy in bits; zero-probability terms contribute nothing."""
    if not probabilities or any(not 0.0 <= p <= 1.0 for p in probabilities):
        raise NotADistribution("probabilities must be non-empty and lie in [0, 1]")
    if abs(math.fsum(probabilities) - 1.0) > DIST_TOL:
        raise NotADistribution(f"probabilities sum to {math.fsum(probabilities)}, expected 1")
    return math.fsum(-p * math.log2(p) for p in probabilities if p > 0.0)


@dataclass(frozen=True)
class DiffVector:
    diffs: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.diffs)


def rating_diff(ui: Sequence[int], uj: Sequence[int]) -> DiffVector:
    """Componentwise ``ui - uj`` over a common rated index set."""
    if len(ui) != len(uj):
        raise LengthMismatch(f"vectors have lengths {len(ui)} and {len(uj)}")
    if not ui:
        raise EmptyCommonSet("users share no rated item")
    return DiffVector(tuple(a - b for a, b in zip(ui, uj)))


def weighted_diff_entropy(d) -> float:
    """Entropy of the difference values, each term weighted by ``|d|``,
    scaled by ``1/n`` for the size of the common set.

    Probabilities are empirical frequencies; each distinct value counts once.
    """
    diffs = d.diffs if isinstance(d, DiffVector) else tuple(d)
    n = len(diffs)
    if n == 0:
        raise EmptyCommonSet("weighted difference entropy needs at least one difference")
    counts = Counter(diffs)
    total = math.fsum(-(c / n) * math.log2(c / n) * abs(value) for value, c in counts.items())
    return total / n + 0.0


def normalize_wde(wde_values: Mapping) -> dict:
    """Map WDE values to [0, 1]: lowest WDE -> 1, highest -> 0.

    When all values coincide every entry maps to 1.
    """
    if not wde_values:
        return {}
    hi = max(wde_values.values())
    lo = min(wde_values.values())
    span = hi - lo
    if span <= 0.0:
        return {k: 1.0 for k in wde_values}
    return {k: min(1.0, max(0.0, (hi - w) / span)) for k, w in wde_values.items()}
