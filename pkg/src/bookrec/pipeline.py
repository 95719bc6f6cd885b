"""Run configuration and the blended per-pair prediction pipeline."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .antcluster import ClusterParams, ClusterSet, predict_rating_cluster, select_neighbor_clusters
from .blend import blend_scores, clamp_score, round_half_up
from .cf import DEFAULT_K, tag_knn_predict
from .errors import DataError, MalformedLine, NoRatings, NoSimilarBooks
from .ratings import RatingMatrix, TagCatalog, mean_rating

CLUSTER_FIELDS = tuple(f.name for f in dataclasses.fields(ClusterParams))


@dataclass
class RunConfig:
    ratings_path: str | None = None
    tags_path: str | None = None
    ahp_config_path: str | None = None
    cluster: dict = field(default_factory=dict)
    k: int = DEFAULT_K
    n: int = 3
    seed: int = 0
    output_dir: str | None = None
    test_fraction: float = 0.2
    n_values: list[int] = field(default_factory=lambda: [1, 3, 5, 10])

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise DataError(f"{path}: run config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise DataError(f"{path}: unknown config keys {unknown}")
        return cls(**data)

    def cluster_params(self) -> ClusterParams:
        unknown = sorted(set(self.cluster) - set(CLUSTER_FIELDS))
        if unknown:
            raise DataError(f"unknown cluster parameters {unknown}")
        params = dict(self.cluster)
        params.setdefault("seed", self.seed)
        p = ClusterParams(**params)
        p.validate()
        return p

    def validate(self) -> None:
        for name in ("ratings_path", "tags_path", "ahp_config_path"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise DataError(f"{name}: file not found: {path}")
        if self.k < 1 or self.n < 1:
            raise ValueError("k and n must be at least 1")
        if not 0.0 <= self.test_fraction <= 1.0:
            raise ValueError("test_fraction must lie in [0, 1]")
        self.cluster_params()


def load_pairs(path) -> list[tuple[int, int]]:
    """``user_id<TAB>book_id`` lines; blank and ``#`` lines skipped."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise MalformedLine(line_no, f"expected 2 tab-separated fields, got {len(fields)}", path)
            try:
                pairs.append((int(fields[0]), int(fields[1])))
            except ValueError:
                raise MalformedLine(line_no, "non-integer field", path) from None
    return pairs


@dataclass(frozen=True)
class PredictionRow:
    user: int
    book: int
    tag_knn: int | None
    cluster: float | None
    final: int


def predict_pair(
    user: int, book: int, matrix: RatingMatrix, tags: TagCatalog, clusters: ClusterSet | None, k: int = DEFAULT_K
) -> PredictionRow:
    """Blend both predictors for one pair, degrading to whichever side is
    available and finally to the user's rounded mean."""
    if not matrix.user_ratings(user):
        raise NoRatings(user)
    try:
        yi = tag_knn_predict(user, book, matrix, tags, k)
    except NoSimilarBooks:
        yi = None
    yj = None
    if clusters is not None and clusters.clusters:
        sel = select_neighbor_clusters(user, clusters, matrix)
        value = predict_rating_cluster(user, book, sel, matrix)
        yj = value if value > 0.0 else None
    if yi is not None and yj is not None:
        final = blend_scores(yi, yj)
    elif yi is not None:
        final = clamp_score(yi)
    elif yj is not None:
        final = clamp_score(round_half_up(yj))
    else:
        final = clamp_score(round_half_up(mean_rating(matrix, user)))
    return PredictionRow(user, book, yi, yj, final)


def predict_pipeline(
    pairs: Iterable[tuple[int, int]],
    matrix: RatingMatrix,
    tags: TagCatalog,
    clusters: ClusterSet | None,
    k: int = DEFAULT_K,
) -> list[PredictionRow]:
    rows = []
    for idx, (user, book) in enumerate(pairs, start=1):
        try:
            rows.append(predict_pair(user, book, matrix, tags, clusters, k))
        except DataError as exc:
            raise DataError(f"pair {idx} (user {user}, book {book}): {exc}") from exc
    return rows

