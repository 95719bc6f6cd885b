"""User-based collaborative filtering with entropy-weighted neighbours, plus
the first-tag nearest-neighbour predictor.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .errors import NoCandidates, NoRatings, NoSimilarBooks
from .ratings import MAX_SCORE, MIN_SCORE, RatingMatrix, TagCatalog, mean_rating
from .similarity import normalize_wde, rating_diff, weighted_diff_entropy

DEFAULT_K = 5


@dataclass(frozen=True)
class UserProfile:
    user: int
    rated: frozenset[int]
    unrated: frozenset[int]

    @property
    def item_space(self) -> frozenset[int]:
        return self.rated | self.unrated

    @classmethod
    def of(cls, user: int, matrix: RatingMatrix) -> "UserProfile":
        rated = frozenset(matrix.user_ratings(user))
        return cls(user, rated, frozenset(matrix.books) - rated)


@dataclass(frozen=True)
class NeighborSet:
    target: int
    neighbors: tuple[tuple[int, float], ...]
    k: int

    def __len__(self) -> int:
        return len(self.neighbors)


@dataclass(frozen=True)
class RecommendationList:
    user: int
    items: tuple[tuple[int, float], ...]

    @property
    def books(self) -> list[int]:
        return [b for b, _ in self.items]

    def __len__(self) -> int:
        return len(self.items)


def _clamp(x: float) -> float:
    return min(float(MAX_SCORE), max(float(MIN_SCORE), x))


def tag_knn_predict(user: int, book: int, matrix: RatingMatrix, tags: TagCatalog, k: int = DEFAULT_K) -> int:
    """Predict from the user's own scores on books sharing the target's first tag.

    The k books sharing the most tags with the target are kept (ties by
    book id) and their most frequent score wins. Equal counts go to the
    score nearest the user's mean, then to the lower score. A book the user
    already rated returns that rating.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    known = matrix.rating(user, book)
    if known:
        return known
    first = tags.first_tag(book)
    if first is None:
        raise NoSimilarBooks(user, book)
    target_tags = set(tags.tags[book])
    similar = [
        (b, s) for b, s in matrix.user_ratings(user).items() if b != book and tags.first_tag(b) == first
    ]
    if not similar:
        raise NoSimilarBooks(user, book)
    similar.sort(key=lambda bs: (-len(target_tags.intersection(tags.tags[bs[0]])), bs[0]))
    counts = Counter(s for _, s in similar[:k])
    top = max(counts.values())
    mean = mean_rating(matrix, user)
    return min((s for s, c in counts.items() if c == top), key=lambda s: (abs(s - mean), s))


def wde_table(user: int, matrix: RatingMatrix) -> dict[int, float]:
    """WDE against every user sharing at least one rated book with ``user``."""
    ratings = matrix.user_ratings(user)
    if not ratings:
        raise NoRatings(user)
    candidates = {v for b in ratings for v in matrix.book_ratings(b)}
    candidates.discard(user)
    table = {}
    for v in sorted(candidates):
        other = matrix.user_ratings(v)
        common = sorted(b for b in ratings if b in other)
        d = rating_diff([ratings[b] for b in common], [other[b] for b in common])
        table[v] = weighted_diff_entropy(d)
    return table


def nwde_neighbors(user: int, matrix: RatingMatrix, k: int = DEFAULT_K) -> NeighborSet:
    """Top-k users by normalized WDE similarity, ties broken by user id."""
    if k < 1:
        raise ValueError("k must be at least 1")
    table = wde_table(user, matrix)
    if not table:
        raise NoCandidates(user)
    nwde = normalize_wde(table)
    ranked = sorted(nwde.items(), key=lambda vs: (-vs[1], vs[0]))
    return NeighborSet(user, tuple(ranked[:k]), k)


def predict_rating_cf(user: int, book: int, nb: NeighborSet, matrix: RatingMatrix, clamp: bool = True) -> float:
    """Mean-centred neighbour prediction.

    Falls back to the user's own mean when no neighbour rated the book or
    all their similarities are zero. ``clamp=False`` exposes the raw value.
    """
    base = mean_rating(matrix, user)
    num = []
    den = []
    for v, sim in nb.neighbors:
        r = matrix.rating(v, book)
        if r:
            num.append(sim * (r - mean_rating(matrix, v)))
            den.append(sim)
    total = math.fsum(den)
    if total <= 0.0:
        return base
    value = base + math.fsum(num) / total
    return _clamp(value) if clamp else value


def top_n_recommend(user: int, n: int, matrix: RatingMatrix, nb: NeighborSet | None = None) -> RecommendationList:
    """The n unrated books with the highest predicted score."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if nb is None:
        nb = nwde_neighbors(user, matrix)
    rated = matrix.user_ratings(user)
    scored = [(b, predict_rating_cf(user, b, nb, matrix)) for b in matrix.books if b not in rated]
    scored.sort(key=lambda bs: (-bs[1], bs[0]))
    return RecommendationList(user, tuple(scored[:n]))
