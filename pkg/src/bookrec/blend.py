"""Combining the two predictors and scoring recommendation lists by hitrate."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .antcluster import ClusterSet, select_neighbor_clusters, top_n_cluster
from .cf import (
    DEFAULT_K,
    NeighborSet,
    RecommendationList,
    nwde_neighbors,
    predict_rating_cf,
    top_n_recommend,
)
from .errors import EmptyRecommendation, NoCandidates
from .ratings import MAX_SCORE, MIN_SCORE, RatingMatrix, SplitPair

RELEVANT_SCORE = 4


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def clamp_score(x: int) -> int:
    return min(MAX_SCORE, max(MIN_SCORE, x))


@dataclass(frozen=True)
class BlendedScore:
    tag_knn: int
    cluster: float
    final: int


def blend_scores(yi: int, yj: float) -> int:
    """Rounded mean of the tag-KNN score and the cluster score.

    ``yj = 0`` encodes a missing cluster prediction and still enters the
    mean; callers wanting single-side fallback handle that before calling.
    """
    if not MIN_SCORE <= yi <= MAX_SCORE:
        raise ValueError(f"tag-KNN score {yi} outside [1, 5]")
    if not 0 <= yj <= MAX_SCORE:
        raise ValueError(f"cluster score {yj} outside [0, 5]")
    return clamp_score(round_half_up((yi + yj) / 2))


def interleave_recommendations(a: RecommendationList, b: RecommendationList, n: int) -> RecommendationList:
    """Take turns drawing the next unseen book from ``a`` then ``b``.

    A book already taken is skipped within the same turn. Once one list
    runs out the other supplies the rest.
    """
    sources = (a.items, b.items)
    pos = [0, 0]
    out: list[tuple[int, float]] = []
    seen: set[int] = set()
    turn = 0
    while len(out) < n and (pos[0] < len(sources[0]) or pos[1] < len(sources[1])):
        items = sources[turn]
        while pos[turn] < len(items) and items[pos[turn]][0] in seen:
            pos[turn] += 1
        if pos[turn] < len(items):
            book, score = items[pos[turn]]
            pos[turn] += 1
            seen.add(book)
            out.append((book, score))
        turn = 1 - turn
    return RecommendationList(a.user, tuple(out))


def _books(recommended) -> list[int]:
    if isinstance(recommended, RecommendationList):
        return recommended.books
    return list(recommended)


def hitrate(recommended, reference: Iterable[int]) -> float:
    """Share of recommended books found in the reference set."""
    books = _books(recommended)
    if not books:
        raise EmptyRecommendation("hitrate of an empty recommendation list is undefined")
    ref = set(reference)
    return sum(1 for b in books if b in ref) / len(books)


@dataclass(frozen=True)
class HitrateReport:
    n: int
    per_user: dict[int, float]
    mean: float
    unsorted_per_user: dict[int, float] = field(default_factory=dict)
    unsorted_mean: float = float("nan")

    @property
    def user_count(self) -> int:
        return len(self.per_user)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_hitrate": self.mean,
            "unsorted_mean_hitrate": self.unsorted_mean,
            "user_count": self.user_count,
            "per_user": {str(u): self.per_user[u] for u in sorted(self.per_user)},
            "unsorted_per_user": {str(u): self.unsorted_per_user[u] for u in sorted(self.unsorted_per_user)},
        }


# (user, n, train, candidates) -> recommended book ids, best first
Recommender = Callable[[int, int, RatingMatrix, Sequence[int]], Sequence[int]]


def neighbors_or_empty(user: int, matrix: RatingMatrix, k: int) -> NeighborSet:
    try:
        return nwde_neighbors(user, matrix, k)
    except NoCandidates:
        return NeighborSet(user, (), k)


def rank_candidates(user: int, candidates: Sequence[int], train: RatingMatrix, k: int = DEFAULT_K) -> list[int]:
    """Candidates ordered by CF prediction, highest first, ties by book id."""
    nb = neighbors_or_empty(user, train, k)
    scored = [(b, predict_rating_cf(user, b, nb, train)) for b in candidates]
    scored.sort(key=lambda bs: (-bs[1], bs[0]))
    return [b for b, _ in scored]


def cf_recommender(k: int = DEFAULT_K) -> Recommender:
    def recommend(user, n, train, candidates):
        return rank_candidates(user, candidates, train, k)[:n]

    return recommend


def hitrate_at_n(
    matrix: RatingMatrix,
    split: SplitPair,
    n_values: Sequence[int],
    k: int = DEFAULT_K,
    recommender: Recommender | None = None,
    relevant_score: int = RELEVANT_SCORE,
) -> dict[int, HitrateReport]:
    """Hitrate of top-n lists built from ``split.train`` against each user's
    held-out books scoring at least ``relevant_score``.

    Candidates are the books of ``matrix`` the user has not rated in train.
    Alongside the ranked lists, an unranked baseline takes the first n
    candidates of a seeded shuffle.
    """
    if any(n < 1 for n in n_values):
        raise ValueError("every n must be at least 1")
    train = split.train
    all_books = matrix.books
    max_n = max(n_values)
    rng = random.Random(split.seed)
    ranked: dict[int, list[int]] = {}
    unranked: dict[int, list[int]] = {}
    positives: dict[int, set[int]] = {}
    for user in split.test.users:
        held = {b for b, s in split.test.user_ratings(user).items() if s >= relevant_score}
        if not held or not train.has_user(user):
            continue
        rated = train.user_ratings(user)
        candidates = [b for b in all_books if b not in rated]
        positives[user] = held
        if recommender is None:
            ranked[user] = rank_candidates(user, candidates, train, k)[:max_n]
        else:
            ranked[user] = list(recommender(user, max_n, train, candidates))
        shuffled = candidates[:]
        rng.shuffle(shuffled)
        unranked[user] = shuffled[:max_n]

    reports = {}
    for n in n_values:
        per_user = {u: hitrate(ranked[u][:n], positives[u]) for u in positives if ranked[u]}
        base = {u: hitrate(unranked[u][:n], positives[u]) for u in positives if unranked[u]}
        reports[n] = HitrateReport(
            n,
            per_user,
            math.fsum(per_user.values()) / len(per_user) if per_user else float("nan"),
            base,
            math.fsum(base.values()) / len(base) if base else float("nan"),
        )
    return reports


def hybrid_recommend(
    user: int, n: int, matrix: RatingMatrix, clusters: ClusterSet, k: int = DEFAULT_K, lam: float | None = None
) -> RecommendationList:
    """Cluster-based top-n interleaved with the entropy-CF top-n."""
    sel = select_neighbor_clusters(user, clusters, matrix, lam)
    by_cluster = RecommendationList(user, tuple(top_n_cluster(user, n, matrix, sel)))
    by_cf = top_n_recommend(user, n, matrix, neighbors_or_empty(user, matrix, k))
    return interleave_recommendations(by_cluster, by_cf, n)
