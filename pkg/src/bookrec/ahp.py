"""Pairwise-comparison weighting with consistency checking, and fuzzy
comprehensive scoring over a grade scale.

Weights are the mean of the column-normalized comparison matrix. The
principal eigenvalue used by the consistency check is estimated from
``A @ w`` rather than by an eigen-solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NonReciprocal, ShapeMismatch, UnknownOrder

RECIPROCAL_TOL = 1e-9
CR_THRESHOLD = 0.1

# Random consistency index by matrix order (index 0 is order 1).
RANDOM_INDEX = (0.0, 0.0, 0.52, 0.89, 1.12, 1.26, 1.36, 1.41, 1.46, 1.49)


def parse_judgment(value) -> float:
    """Accept numbers or strings such as ``"1/3"``."""
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


@dataclass(frozen=True)
class ComparisonMatrix:
    cells: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        n = len(self.cells)
        if n == 0 or any(len(row) != n for row in self.cells):
            raise ShapeMismatch("comparison matrix must be square and non-empty")
        if any(not (c > 0 and math.isfinite(c)) for row in self.cells for c in row):
            raise NonReciprocal("comparison matrix entries must be positive and finite")

    @classmethod
    def from_rows(cls, rows) -> "ComparisonMatrix":
        return cls(tuple(tuple(parse_judgment(c) for c in row) for row in rows))

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "ComparisonMatrix":
        """Perfectly consistent matrix with ``a_ij = w_i / w_j``."""
        return cls(tuple(tuple(wi / wj for wj in weights) for wi in weights))

    @property
    def order(self) -> int:
        return len(self.cells)

    def check_reciprocal(self, tol: float = RECIPROCAL_TOL) -> None:
        n = self.order
        for i in range(n):
            if abs(self.cells[i][i] - 1.0) > tol:
                raise NonReciprocal(f"diagonal entry ({i}, {i}) is {self.cells[i][i]}, expected 1")
            for j in range(i + 1, n):
                if abs(self.cells[j][i] - 1.0 / self.cells[i][j]) > tol:
                    raise NonReciprocal(
                        f"entries ({i}, {j})={self.cells[i][j]} and ({j}, {i})={self.cells[j][i]} are not reciprocal"
                    )


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    ci: float
    ri: float
    cr: float
    acceptable: bool


@dataclass(frozen=True)
class GradeScale:
    labels: tuple[str, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.scores) or not self.scores:
            raise ShapeMismatch("grade labels and scores must have the same non-zero length")
        if any(a <= b for a, b in zip(self.scores, self.scores[1:])):
            raise ValueError("grade scores must be strictly decreasing")


FOUR_GRADE = GradeScale(("excellent", "good", "medium", "poor"), (100.0, 75.0, 60.0, 35.0))
FIVE_POINT = GradeScale(("5", "4", "3", "2", "1"), (5.0, 4.0, 3.0, 2.0, 1.0))
GRADE_PRESETS = {"four-grade": FOUR_GRADE, "five-point": FIVE_POINT}


def _as_matrix(a) -> ComparisonMatrix:
    return a if isinstance(a, ComparisonMatrix) else ComparisonMatrix.from_rows(a)


def ahp_weights(a) -> tuple[float, ...]:
    """Average of the column-normalized comparison matrix."""
    a = _as_matrix(a)
    a.check_reciprocal()
    n = a.order
    col_sums = [math.fsum(a.cells[k][j] for k in range(n)) for j in range(n)]
    return tuple(math.fsum(a.cells[i][j] / col_sums[j] for j in range(n)) / n for i in range(n))


def estimate_lambda_max(a, w: Sequence[float]) -> float:
    a = _as_matrix(a)
    n = a.order
    aw = [math.fsum(a.cells[i][j] * w[j] for j in range(n)) for i in range(n)]
    return math.fsum(aw[i] / w[i] for i in range(n)) / n


def random_index(n: int) -> float:
    if not 1 <= n <= len(RANDOM_INDEX):
        raise UnknownOrder(f"no random index tabulated for order {n} (supported: 1..{len(RANDOM_INDEX)})")
    return RANDOM_INDEX[n - 1]


def consistency_check(a, w: Sequence[float] | None = None) -> ConsistencyReport:
    a = _as_matrix(a)
    n = a.order
    ri = random_index(n)
    if w is None:
        w = ahp_weights(a)
    if len(w) != n:
        raise ShapeMismatch(f"weight vector has length {len(w)}, matrix order is {n}")
    lam = estimate_lambda_max(a, w)
    if n <= 2:
        # 1x1 and 2x2 reciprocal matrices are always consistent
        return ConsistencyReport(lam, 0.0, ri, 0.0, True)
    ci = (lam - n) / (n - 1)
    cr = ci / ri
    return ConsistencyReport(lam, ci, ri, cr, cr < CR_THRESHOLD)


def compose_global_weights(parent: Sequence, children: Sequence[Sequence]) -> tuple:
    """Multiply each child group by its parent weight and concatenate.

    Works for floats and ``Fraction`` alike, so exact inputs give exact output.
    """
    if len(parent) != len(children):
        raise ShapeMismatch(f"{len(parent)} parent weights but {len(children)} child groups")
    for i, child in enumerate(children):
        if not child:
            raise ShapeMismatch(f"child group {i} is empty")
        if abs(float(sum(child)) - 1.0) > RECIPROCAL_TOL:
            raise ShapeMismatch(f"child group {i} sums to {float(sum(child))}, expected 1")
    return tuple(p * c for p, child in zip(parent, children) for c in child)


def _check_membership(r) -> None:
    for i, row in enumerate(r):
        if any(not 0.0 <= x <= 1.0 for x in row):
            raise ValueError(f"membership row {i} has entries outside [0, 1]")
        if abs(math.fsum(row) - 1.0) > 1e-6:
            raise ValueError(f"membership row {i} sums to {math.fsum(row)}, expected 1")


def fuzzy_composite_score(w: Sequence[float], r: Sequence[Sequence[float]], g: GradeScale = FOUR_GRADE) -> float:
    """Weighted-average composition ``b = w . R`` scored against the grade values."""
    if len(w) != len(r):
        raise ShapeMismatch(f"{len(w)} weights but {len(r)} membership rows")
    if any(len(row) != len(g.scores) for row in r):
        raise ShapeMismatch(f"membership rows must have {len(g.scores)} columns")
    _check_membership(r)
    b = [math.fsum(w[i] * r[i][j] for i in range(len(w))) for j in range(len(g.scores))]
    return math.fsum(bj * s for bj, s in zip(b, g.scores))


@dataclass
class CriterionNode:
    """One node of a criterion hierarchy; leaves carry no matrix."""

    name: str
    children: list["CriterionNode"] = field(default_factory=list)
    matrix: ComparisonMatrix | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "CriterionNode":
        if "name" not in d:
            raise ValueError("criterion node without a 'name'")
        children = [cls.from_dict(c) for c in d.get("children", [])]
        matrix = d.get("matrix")
        if matrix is not None:
            matrix = ComparisonMatrix.from_rows(matrix)
        elif len(children) == 1:
            matrix = ComparisonMatrix(((1.0,),))
        elif children:
            raise ValueError(f"criterion {d['name']!r} has children but no comparison matrix")
        if matrix is not None and matrix.order != len(children):
            raise ShapeMismatch(
                f"criterion {d['name']!r}: matrix order {matrix.order} but {len(children)} children"
            )
        return cls(d["name"], children, matrix)


@dataclass(frozen=True)
class NodeResult:
    name: str
    path: tuple[str, ...]
    local_weight: float
    global_weight: float
    consistency: ConsistencyReport | None


def evaluate_hierarchy(root: CriterionNode) -> list[NodeResult]:
    """Local and global weights for every node, root first, depth first."""
    results: list[NodeResult] = []

    def visit(node, path, local_weight, global_weight):
        report = None
        if node.children:
            local = ahp_weights(node.matrix)
            report = consistency_check(node.matrix, local)
        results.append(NodeResult(node.name, path, local_weight, global_weight, report))
        if node.children:
            for child, lw in zip(node.children, local):
                visit(child, path + (child.name,), lw, global_weight * lw)

    visit(root, (root.name,), 1.0, 1.0)
    return results


def leaf_weights(root: CriterionNode) -> dict[str, float]:
    leaves: dict[str, float] = {}

    def visit(node, weight):
        if not node.children:
            leaves[node.name] = weight
            return
        for child, lw in zip(node.children, ahp_weights(node.matrix)):
            visit(child, weight * lw)

    visit(root, 1.0)
    return leaves
