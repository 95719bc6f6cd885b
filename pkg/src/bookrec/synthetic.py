"""Synthetic rating data with known structure, used as ground truth when
checking clustering and recommendation quality."""

from __future__ import annotations

import random
from collections import Counter

import numpy as np

from .ratings import RatingMatrix


def planted_clusters(n_users=30, n_books=15, n_groups=3, seed=0, low=3, high=5):
    """Users split evenly into groups; each group rates its own disjoint block
    of books with scores in [low, high].

    Returns ``(matrix, labels)`` with ``labels[user] = group``. Book blocks are
    disjoint, so users of different groups have cosine similarity 0.
    """
    rng = random.Random(seed)
    per_group = n_books // n_groups
    entries = {}
    labels = {}
    for u in range(n_users):
        g = u % n_groups
        labels[u] = g
        for b in range(g * per_group, (g + 1) * per_group):
            entries[(u, b)] = rng.randint(low, high)
    return RatingMatrix(entries), labels


def purity(groups, labels) -> float:
    """Fraction of users whose cluster's majority label equals their own."""
    total = 0
    hits = 0
    for members in groups:
        counts = Counter(labels[u] for u in members)
        hits += max(counts.values())
        total += len(members)
    return hits / total


def planted_preferences(n_users=60, n_books=40, n_groups=4, density=0.5, seed=0):
    """Users in taste groups: books liked by the group score 4-5, the rest 1-2.

    Each user rates a random ``density`` fraction of the books.
    Returns ``(matrix, labels, liked)`` where ``liked[g]`` is the set of
    books group ``g`` likes.
    """
    rng = random.Random(seed)
    books = list(range(n_books))
    liked = {}
    for g in range(n_groups):
        shuffled = books[:]
        rng.shuffle(shuffled)
        liked[g] = set(shuffled[: n_books // n_groups])
    entries = {}
    labels = {}
    for u in range(n_users):
        g = u % n_groups
        labels[u] = g
        for b in rng.sample(books, max(1, int(density * n_books))):
            entries[(u, b)] = rng.randint(4, 5) if b in liked[g] else rng.randint(1, 2)
    return RatingMatrix(entries), labels, liked


def random_matrix(n_users=50, n_books=50, density=0.3, seed=0, low=1, high=5):
    """Uniformly random sparse matrix; every user gets at least one rating."""
    rng = np.random.default_rng(seed)
    entries = {}
    for u in range(n_users):
        mask = rng.random(n_books) < density
        mask[rng.integers(n_books)] = True
        for b in np.flatnonzero(mask):
            entries[(u, int(b))] = int(rng.integers(low, high + 1))
    return RatingMatrix(entries)
