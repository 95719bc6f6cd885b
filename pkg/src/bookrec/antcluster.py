"""Ant-colony clustering of users on a toroidal 2-D grid, and rating
prediction from the neighbouring clusters it produces.

Ants wander the grid picking up isolated users and dropping them next to
similar ones. Once the ants stop, each 8-connected group of occupied cells
becomes a cluster.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import GridTooSmall, NoneSelected
from .ratings import MAX_SCORE, MIN_SCORE, RatingMatrix

MAX_DEFAULT_ITERATIONS = 1_000_000


@dataclass(frozen=True)
class ClusterParams:
    """Clustering knobs. ``None`` fields are sized from the user count by
    :meth:`resolve`; ``speed=None`` draws one speed per ant in (0, max_speed].
    """

    alpha: float = 0.25
    speed: float | None = None
    max_speed: float = 10.0
    patch_side: int = 3
    k1: float = 0.1
    k2: float = 0.15
    iterations: int | None = None
    grid_width: int | None = None
    grid_height: int | None = None
    ant_count: int | None = None
    seed: int = 0

    def resolve(self, n_users: int) -> "ClusterParams":
        side = math.ceil(math.sqrt(4 * n_users)) or 1
        p = replace(
            self,
            iterations=self.iterations if self.iterations is not None else min(10_000 * n_users, MAX_DEFAULT_ITERATIONS),
            grid_width=self.grid_width if self.grid_width is not None else side,
            grid_height=self.grid_height if self.grid_height is not None else side,
            ant_count=self.ant_count if self.ant_count is not None else max(1, math.ceil(n_users / 3)),
        )
        p.validate(n_users)
        return p

    def validate(self, n_users: int | None = None) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.max_speed <= 0:
            raise ValueError("max_speed must be positive")
        if self.speed is not None and not 0 < self.speed <= self.max_speed:
            raise ValueError("speed must lie in (0, max_speed]")
        if self.patch_side < 1 or self.patch_side % 2 == 0:
            raise ValueError("patch_side must be an odd integer >= 1")
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0 < self.k2 <= 0.5:
            raise ValueError("k2 must lie in (0, 0.5] so that the drop probability stays in [0, 1]")
        for name in ("iterations", "grid_width", "grid_height", "ant_count"):
            value = getattr(self, name)
            if value is not None and value < (0 if name == "iterations" else 1):
                raise ValueError(f"{name} must be positive")
        if n_users is not None and self.grid_width and self.grid_height:
            if self.grid_width * self.grid_height < n_users:
                raise GridTooSmall(
                    f"grid {self.grid_width}x{self.grid_height} has fewer cells than {n_users} users"
                )


def similarity_scale(params: ClusterParams, speed: float) -> float:
    """Denominator ``alpha * (1 + (v - 1) / v_max)`` of the local density."""
    return params.alpha * (1.0 + (speed - 1.0) / params.max_speed)


def local_avg_similarity(distances: Sequence[float], params: ClusterParams, speed: float | None = None) -> float:
    """Local density of an object given the distances to the objects in its
    s x s patch (the object itself excluded)."""
    if speed is None:
        speed = params.speed if params.speed is not None else params.max_speed
    scale = similarity_scale(params, speed)
    total = math.fsum(1.0 - d / scale for d in distances)
    return max(0.0, total / params.patch_side**2)


def pickup_drop_probabilities(f: float, params: ClusterParams) -> tuple[float, float]:
    p_pick = (params.k1 / (params.k1 + f)) ** 2
    p_drop = 2.0 * f if f < params.k2 else 1.0
    return p_pick, p_drop


@dataclass(frozen=True)
class Cluster:
    members: frozenset[int]
    center: Mapping[int, float]
    density: float


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple[Cluster, ...]
    total_users: int
    positions: Mapping[int, tuple[int, int]] = field(default_factory=dict)

    def cluster_of(self, user: int) -> int:
        for i, c in enumerate(self.clusters):
            if user in c.members:
                return i
        raise KeyError(user)

    def labels(self) -> dict[int, int]:
        return {u: i for i, c in enumerate(self.clusters) for u in c.members}

    def to_dict(self) -> dict:
        return {
            "total_users": self.total_users,
            "clusters": [
                {
                    "id": i,
                    "members": sorted(c.members),
                    "density": c.density,
                    "center": {str(b): c.center[b] for b in sorted(c.center)},
                }
                for i, c in enumerate(self.clusters)
            ],
        }

    def trace_rows(self) -> list[tuple[int, int, int]]:
        """Final grid occupancy as (x, y, user_id), sorted by position."""
        return sorted((x, y, u) for u, (x, y) in self.positions.items())


def cluster_center(matrix: RatingMatrix, members) -> dict[int, float]:
    """Mean score per book over the members who rated it."""
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for u in members:
        for b, s in matrix.user_ratings(u).items():
            sums[b] = sums.get(b, 0.0) + s
            counts[b] = counts.get(b, 0) + 1
    return {b: sums[b] / counts[b] for b in sorted(sums)}


def build_cluster_set(matrix: RatingMatrix, groups, positions=None) -> ClusterSet:
    """Wrap user groups as clusters, ordered by their smallest member id."""
    total = sum(len(g) for g in groups)
    ordered = sorted((sorted(g) for g in groups if g), key=lambda g: g[0])
    clusters = tuple(
        Cluster(frozenset(g), cluster_center(matrix, g), len(g) / total) for g in ordered
    )
    return ClusterSet(clusters, total, dict(positions or {}))


def _distance_table(matrix: RatingMatrix, users: list[int]) -> list[list[float]]:
    dense = matrix.to_dense(users)
    norms = np.linalg.norm(dense, axis=1)
    unit = dense / norms[:, None]
    dist = 1.0 - np.clip(unit @ unit.T, -1.0, 1.0)
    np.fill_diagonal(dist, 0.0)
    return dist.tolist()


class _Grid:
    def __init__(self, width: int, height: int, params: ClusterParams, dist):
        self.w = width
        self.h = height
        self.cells: list[int | None] = [None] * (width * height)
        self.params = params
        self.dist = dist
        r = params.patch_side // 2
        # on grids narrower than the patch, wrapped offsets would repeat cells
        wrapped = {(dx % width, dy % height) for dy in range(-r, r + 1) for dx in range(-r, r + 1)}
        wrapped.discard((0, 0))
        self.offsets = sorted(wrapped)
        self.inv_area = 1.0 / params.patch_side**2

    def density(self, obj: int, x: int, y: int, scale: float) -> float:
        total = 0.0
        row = self.dist[obj]
        w, h, cells = self.w, self.h, self.cells
        for dx, dy in self.offsets:
            other = cells[((y + dy) % h) * w + (x + dx) % w]
            if other is not None and other != obj:
                total += 1.0 - row[other] / scale
        return total * self.inv_area if total > 0.0 else 0.0


def _components(grid: _Grid) -> list[list[int]]:
    """8-connected groups of occupied cells on the torus."""
    seen = [False] * len(grid.cells)
    groups = []
    for start, occupant in enumerate(grid.cells):
        if occupant is None or seen[start]:
            continue
        seen[start] = True
        stack, group = [start], []
        while stack:
            idx = stack.pop()
            group.append(grid.cells[idx])
            y, x = divmod(idx, grid.w)
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    j = ((y + dy) % grid.h) * grid.w + (x + dx) % grid.w
                    if not seen[j] and grid.cells[j] is not None:
                        seen[j] = True
                        stack.append(j)
        groups.append(group)
    return groups


def run_ant_clustering(matrix: RatingMatrix, params: ClusterParams | None = None) -> ClusterSet:
    """Cluster the users of ``matrix``. Deterministic for a fixed seed."""
    users = matrix.users
    if not users:
        raise ValueError("cannot cluster an empty rating matrix")
    params = (params or ClusterParams()).resolve(len(users))
    dist = _distance_table(matrix, users)
    rng = random.Random(params.seed)
    W, H = params.grid_width, params.grid_height
    grid = _Grid(W, H, params, dist)
    for obj, cell in enumerate(rng.sample(range(W * H), len(users))):
        grid.cells[cell] = obj

    n_ants = params.ant_count
    ant_pos = [rng.randrange(W * H) for _ in range(n_ants)]
    if params.speed is None:
        ant_speed = [params.max_speed * (1.0 - rng.random()) for _ in range(n_ants)]
    else:
        ant_speed = [params.speed] * n_ants
    ant_step = [max(1, math.ceil(v)) for v in ant_speed]
    ant_scale = [similarity_scale(params, v) for v in ant_speed]
    ant_load: list[int | None] = [None] * n_ants
    k1, k2 = params.k1, params.k2
    cells = grid.cells

    for it in range(params.iterations):
        a = it % n_ants
        step = ant_step[a]
        y, x = divmod(ant_pos[a], W)
        x = (x + rng.randint(-step, step)) % W
        y = (y + rng.randint(-step, step)) % H
        idx = y * W + x
        ant_pos[a] = idx
        load = ant_load[a]
        occupant = cells[idx]
        if load is None:
            if occupant is not None:
                f = grid.density(occupant, x, y, ant_scale[a])
                if rng.random() < (k1 / (k1 + f)) ** 2:
                    ant_load[a] = occupant
                    cells[idx] = None
        elif occupant is None:
            f = grid.density(load, x, y, ant_scale[a])
            if f >= k2 or rng.random() < 2.0 * f:
                cells[idx] = load
                ant_load[a] = None

    # Ants still carrying a user put it on the free cell where it fits best.
    for a in range(n_ants):
        load = ant_load[a]
        if load is None:
            continue
        best, best_f = None, -1.0
        for idx, occupant in enumerate(cells):
            if occupant is None:
                f = grid.density(load, idx % W, idx // W, ant_scale[a])
                if f > best_f:
                    best, best_f = idx, f
        cells[best] = load
        ant_load[a] = None

    groups = [[users[o] for o in g] for g in _components(grid)]
    positions = {users[o]: (idx % W, idx // W) for idx, o in enumerate(cells) if o is not None}
    return build_cluster_set(matrix, groups, positions)


@dataclass(frozen=True)
class NeighborClusterSelection:
    threshold: float
    selected: tuple[int, ...]
    probabilities: tuple[float, ...]
    clusters: tuple[Cluster, ...] = ()

    @property
    def members(self) -> frozenset[int]:
        return frozenset().union(*(c.members for c in self.clusters))


def center_distance(user_ratings: Mapping[int, int], center: Mapping[int, float]) -> float:
    """Euclidean distance over the books the user rated; books no member
    rated count as a center score of 0."""
    return math.sqrt(math.fsum((center.get(b, 0.0) - s) ** 2 for b, s in user_ratings.items()))


def cluster_probabilities(user_ratings: Mapping[int, int], cs: ClusterSet) -> list[float]:
    weights = [c.density / (1.0 + center_distance(user_ratings, c.center)) for c in cs.clusters]
    total = math.fsum(weights)
    return [w / total for w in weights]


def select_neighbor_clusters(
    user: int, cs: ClusterSet, matrix: RatingMatrix, lam: float | None = None
) -> NeighborClusterSelection:
    """Clusters whose selection probability reaches ``lam`` (default
    ``1 / cluster_count``), most probable first."""
    if not cs.clusters:
        raise ValueError("cluster set is empty")
    ratings = matrix.user_ratings(user)
    if not ratings:
        raise ValueError(f"user {user} has no ratings")
    if lam is None:
        lam = 1.0 / len(cs.clusters)
    probs = cluster_probabilities(ratings, cs)
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    selected = tuple(i for i in order if probs[i] >= lam - 1e-12)
    if not selected:
        raise NoneSelected(f"no cluster reaches selection probability {lam} for user {user}")
    return NeighborClusterSelection(
        lam, selected, tuple(probs[i] for i in selected), tuple(cs.clusters[i] for i in selected)
    )


def user_cosine(matrix: RatingMatrix, a: int, b: int) -> float:
    """Cosine similarity of two users' full rating rows (unrated = 0)."""
    ra, rb = matrix.user_ratings(a), matrix.user_ratings(b)
    if len(ra) > len(rb):
        ra, rb = rb, ra
    dot = math.fsum(s * rb[k] for k, s in ra.items() if k in rb)
    if dot == 0.0:
        return 0.0
    na = math.sqrt(math.fsum(s * s for s in ra.values()))
    nb = math.sqrt(math.fsum(s * s for s in rb.values()))
    return min(1.0, dot / (na * nb))


def predict_rating_cluster(user: int, book: int, sel: NeighborClusterSelection, matrix: RatingMatrix) -> float:
    """Similarity-weighted mean of the book's raters in the selected clusters.

    A known rating is returned unchanged. With no usable rater the result
    is 0, which callers read as "no prediction".
    """
    known = matrix.rating(user, book)
    if known:
        return float(known)
    raters = [(v, s) for v, s in matrix.book_ratings(book).items() if v != user and v in sel.members]
    if not raters:
        return 0.0
    sims = [(user_cosine(matrix, user, v), s) for v, s in sorted(raters)]
    den = math.fsum(w for w, _ in sims)
    if den <= 0.0:
        return 0.0
    value = math.fsum(w * s for w, s in sims) / den
    return min(float(MAX_SCORE), max(float(MIN_SCORE), value))


def top_n_cluster(user: int, n: int, matrix: RatingMatrix, sel: NeighborClusterSelection):
    """Unrated books ranked by cluster prediction, as (book, score) pairs.

    Books without a prediction are left out.
    """
    rated = matrix.user_ratings(user)
    scored = []
    for book in sorted({b for v in sel.members for b in matrix.user_ratings(v)}):
        if book in rated:
            continue
        p = predict_rating_cluster(user, book, sel, matrix)
        if p > 0.0:
            scored.append((book, p))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:n]
