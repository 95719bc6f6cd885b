"""User-book rating data: loading, indexing and holdout splits.

Ratings are stored sparsely. A score of 0 is never stored; it only shows up
in dense views, where it stands for "unrated".
"""

from __future__ import annotations

import logging
import math
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    EmptyTagList,
    InvalidFraction,
    MalformedLine,
    NoRatings,
    ScoreOutOfRange,
)

log = logging.getLogger(__name__)

MIN_SCORE = 1
MAX_SCORE = 5


class RatingMatrix:
    """Immutable sparse user x book score matrix.

    Scores are integers in [1, 5]. Per-user and per-book views are built once
    at construction and exposed read-only.
    """

    __slots__ = ("_entries", "_by_user", "_by_book", "duplicates")

    def __init__(self, entries: Mapping[tuple[int, int], int] | None = None, duplicates: int = 0):
        entries = dict(entries or {})
        by_user: dict[int, dict[int, int]] = {}
        by_book: dict[int, dict[int, int]] = {}
        for (user, book), score in entries.items():
            if not isinstance(score, (int, np.integer)) or not MIN_SCORE <= score <= MAX_SCORE:
                raise ValueError(f"score for ({user}, {book}) must be an integer in [1, 5], got {score!r}")
            by_user.setdefault(user, {})[book] = int(score)
            by_book.setdefault(book, {})[user] = int(score)
        self._entries = MappingProxyType({k: int(v) for k, v in entries.items()})
        self._by_user = {u: MappingProxyType(r) for u, r in by_user.items()}
        self._by_book = {b: MappingProxyType(r) for b, r in by_book.items()}
        self.duplicates = duplicates

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[int, int, int]]) -> "RatingMatrix":
        return cls({(u, b): s for u, b, s in triples})

    @property
    def entries(self) -> Mapping[tuple[int, int], int]:
        return self._entries

    @property
    def user_count(self) -> int:
        return len(self._by_user)

    @property
    def book_count(self) -> int:
        return len(self._by_book)

    @property
    def users(self) -> list[int]:
        return sorted(self._by_user)

    @property
    def books(self) -> list[int]:
        return sorted(self._by_book)

    def user_ratings(self, user: int) -> Mapping[int, int]:
        """Books rated by ``user`` mapped to their scores (empty if unknown)."""
        return self._by_user.get(user, MappingProxyType({}))

    def book_ratings(self, book: int) -> Mapping[int, int]:
        return self._by_book.get(book, MappingProxyType({}))

    def rating(self, user: int, book: int) -> int:
        """Score of ``user`` for ``book``; 0 when unrated."""
        return self._entries.get((user, book), 0)

    def has_user(self, user: int) -> bool:
        return user in self._by_user

    def to_dense(self, users=None, books=None) -> np.ndarray:
        """Dense float array (users x books) with 0 for unrated cells."""
        users = self.users if users is None else list(users)
        books = self.books if books is None else list(books)
        col = {b: j for j, b in enumerate(books)}
        dense = np.zeros((len(users), len(books)))
        for i, u in enumerate(users):
            for b, s in self.user_ratings(u).items():
                j = col.get(b)
                if j is not None:
                    dense[i, j] = s
        return dense

    def triples(self) -> list[tuple[int, int, int]]:
        return [(u, b, s) for (u, b), s in sorted(self._entries.items())]

    def dump(self, path) -> None:
        """Write the matrix as ratings TSV, sorted by (user, book)."""
        with open(path, "w", encoding="utf-8") as fh:
            for u, b, s in self.triples():
                fh.write(f"{u}\t{b}\t{s}\n")

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatingMatrix):
            return NotImplemented
        return dict(self._entries) == dict(other._entries)

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def __repr__(self) -> str:
        return f"RatingMatrix(users={self.user_count}, books={self.book_count}, entries={len(self)})"


@dataclass(frozen=True)
class TagCatalog:
    tags: Mapping[int, tuple[str, ...]]

    def first_tag(self, book: int) -> str | None:
        tags = self.tags.get(book)
        return tags[0] if tags else None

    def __len__(self) -> int:
        return len(self.tags)


@dataclass(frozen=True)
class SplitPair:
    train: RatingMatrix
    test: RatingMatrix
    seed: int
    test_fraction: float


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield line_no, line


def load_ratings(path) -> RatingMatrix:
    """Read a ``user_id<TAB>book_id<TAB>score`` file.

    Duplicate (user, book) pairs keep the last line; their number is warned
    about and kept on ``RatingMatrix.duplicates``.
    """
    path = Path(path)
    entries: dict[tuple[int, int], int] = {}
    duplicates = 0
    for line_no, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedLine(line_no, f"expected 3 tab-separated fields, got {len(fields)}", path)
        try:
            user, book, score = (int(f.strip()) for f in fields)
        except ValueError:
            raise MalformedLine(line_no, "non-integer field", path) from None
        if not MIN_SCORE <= score <= MAX_SCORE:
            raise ScoreOutOfRange(line_no, score, path)
        if (user, book) in entries:
            duplicates += 1
        entries[(user, book)] = score
    if duplicates:
        warnings.warn(f"{path}: {duplicates} duplicate (user, book) lines; last occurrence kept", stacklevel=2)
    return RatingMatrix(entries, duplicates=duplicates)


def load_tags(path) -> TagCatalog:
    """Read a ``book_id<TAB>tag1,tag2,...`` file, preserving tag order."""
    path = Path(path)
    tags: dict[int, tuple[str, ...]] = {}
    for line_no, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise MalformedLine(line_no, f"expected 2 tab-separated fields, got {len(fields)}", path)
        try:
            book = int(fields[0].strip())
        except ValueError:
            raise MalformedLine(line_no, "non-integer book id", path) from None
        book_tags = tuple(t.strip() for t in fields[1].split(",") if t.strip())
        if not book_tags:
            raise EmptyTagList(line_no, path)
        tags[book] = book_tags
    return TagCatalog(MappingProxyType(tags))


def mean_rating(matrix: RatingMatrix, user: int) -> float:
    scores = matrix.user_ratings(user)
    if not scores:
        raise NoRatings(user)
    return math.fsum(scores.values()) / len(scores)


def holdout_split(matrix: RatingMatrix, test_fraction: float, seed: int) -> SplitPair:
    """Per-user stratified holdout.

    Each user sends ``round(fraction * count)`` of their ratings to test, but
    always keeps at least one in train.
    """
    if not 0.0 <= test_fraction <= 1.0:
        raise InvalidFraction(f"test_fraction must lie in [0, 1], got {test_fraction}")
    rng = random.Random(seed)
    train: dict[tuple[int, int], int] = {}
    test: dict[tuple[int, int], int] = {}
    for user in matrix.users:
        books = sorted(matrix.user_ratings(user))
        rng.shuffle(books)
        n_test = min(round(test_fraction * len(books)), len(books) - 1)
        for i, book in enumerate(books):
            target = test if i < n_test else train
            target[(user, book)] = matrix.rating(user, book)
    return SplitPair(RatingMatrix(train), RatingMatrix(test), seed, test_fraction)
