import json
import math
from fractions import Fraction
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bookrec.ahp import (
    FIVE_POINT,
    FOUR_GRADE,
    ComparisonMatrix,
    CriterionNode,
    GradeScale,
    ahp_weights,
    compose_global_weights,
    consistency_check,
    estimate_lambda_max,
    evaluate_hierarchy,
    fuzzy_composite_score,
    leaf_weights,
)
from bookrec.errors import NonReciprocal, ShapeMismatch, UnknownOrder

BOOK_CRITERIA = [[1, 2, 6], [1 / 2, 1, 3], [1 / 6, 1 / 3, 1]]
INCONSISTENT = [[1, 2, 6], [1 / 2, 1, 2], [1 / 6, 1 / 2, 1]]


def power_iteration(a, iters=1000):
    """Principal eigenpair by plain power iteration."""
    n = len(a)
    v = [1.0] * n
    lam = 0.0
    for _ in range(iters):
        w = [sum(a[i][j] * v[j] for j in range(n)) for i in range(n)]
        lam = sum(w) / sum(v)
        s = sum(w)
        v = [x / s for x in w]
    return lam, v


class TestWeights:
    def test_book_criteria(self):
        w = ahp_weights(BOOK_CRITERIA)
        assert w == pytest.approx((0.6, 0.3, 0.1), abs=1e-9)

    def test_symmetric_2x2(self):
        assert ahp_weights([[1, 1], [1, 1]]) == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_consistent_2x2(self):
        assert ahp_weights([[1, 3], [1 / 3, 1]]) == pytest.approx((0.75, 0.25), abs=1e-12)

    def test_fraction_strings(self):
        m = ComparisonMatrix.from_rows([["1", "2", "6"], ["1/2", "1", "3"], ["1/6", "1/3", "1"]])
        assert ahp_weights(m) == pytest.approx((0.6, 0.3, 0.1), abs=1e-12)

    def test_non_reciprocal(self):
        with pytest.raises(NonReciprocal):
            ahp_weights([[1, 2], [2, 1]])

    def test_bad_diagonal(self):
        with pytest.raises(NonReciprocal):
            ahp_weights([[2, 1], [1, 1]])

    def test_non_square(self):
        with pytest.raises(ShapeMismatch):
            ComparisonMatrix.from_rows([[1, 2], [1]])

    @settings(max_examples=100)
    @given(st.lists(st.floats(0.01, 100), min_size=1, max_size=10))
    def test_recovers_consistent_weights(self, raw):
        total = math.fsum(raw)
        w = [x / total for x in raw]
        got = ahp_weights(ComparisonMatrix.from_weights(w))
        assert got == pytest.approx(w, abs=1e-9)
        assert math.fsum(got) == pytest.approx(1.0, abs=1e-9)
        assert all(x > 0 for x in got)


class TestConsistency:
    def test_book_criteria_consistent(self):
        r = consistency_check(BOOK_CRITERIA, ahp_weights(BOOK_CRITERIA))
        assert r.lambda_max == pytest.approx(3.0, abs=1e-9)
        assert r.ci == pytest.approx(0.0, abs=1e-9)
        assert r.cr == pytest.approx(0.0, abs=1e-9)
        assert r.ri == 0.52
        assert r.acceptable

    @pytest.mark.parametrize("a", [[[1, 7], [1 / 7, 1]], [[1, 0.2], [5, 1]]])
    def test_2x2_always_acceptable(self, a):
        r = consistency_check(a)
        assert r.cr == 0.0 and r.acceptable

    def test_against_power_iteration(self):
        lam_oracle, v_oracle = power_iteration(INCONSISTENT)
        r = consistency_check(INCONSISTENT)
        # column-mean weights are close to, not equal to, the eigenvector
        assert r.lambda_max == pytest.approx(lam_oracle, abs=1e-3)
        assert r.lambda_max >= 3.0
        assert r.cr >= 0
        assert r.cr == pytest.approx((lam_oracle - 3) / 2 / 0.52, abs=1e-3)
        assert r.acceptable
        # the estimator is exact when handed the true eigenvector
        assert estimate_lambda_max(INCONSISTENT, v_oracle) == pytest.approx(lam_oracle, abs=1e-9)

    def test_inconsistent_flagged(self):
        # circular preferences: a > b > c > a
        a = [[1, 5, 1 / 5], [1 / 5, 1, 5], [5, 1 / 5, 1]]
        r = consistency_check(a)
        assert not r.acceptable and r.cr > 0.1

    def test_unknown_order(self):
        with pytest.raises(UnknownOrder):
            consistency_check(ComparisonMatrix.from_weights([1.0] * 11))

    @settings(max_examples=50)
    @given(st.lists(st.floats(0.05, 20), min_size=3, max_size=10))
    def test_consistent_matrix_cr_zero(self, raw):
        r = consistency_check(ComparisonMatrix.from_weights(raw))
        assert r.cr == pytest.approx(0.0, abs=1e-9)


# Second-level shares implied by the expected global weights (global / parent).
CONTENT = [Fraction(1, 3), Fraction(1, 6), Fraction(1, 12), Fraction(1, 12), Fraction(1, 12), Fraction(1, 12), Fraction(1, 6)]
PRICE = [Fraction(1, 3), Fraction(1, 3), Fraction(1, 6), Fraction(1, 6)]
OUTLOOK = [Fraction(3, 10), Fraction(2, 10), Fraction(4, 10), Fraction(1, 10)]
PARENT = [Fraction(6, 10), Fraction(3, 10), Fraction(1, 10)]
EXPECTED_GLOBALS = [0.2, 0.1, 0.05, 0.05, 0.05, 0.05, 0.1, 0.1, 0.1, 0.05, 0.05, 0.03, 0.02, 0.04, 0.01]


class TestCompose:
    def test_reader_needs(self):
        g = compose_global_weights([0.6, 0.3, 0.1], [[1 / 3, 2 / 3], [1.0], [1.0]])
        assert g[0] == pytest.approx(0.2, abs=1e-12)

    def test_identity_parent(self):
        assert compose_global_weights([1.0], [[0.2, 0.3, 0.5]]) == (0.2, 0.3, 0.5)

    def test_global_table_exact(self):
        g = compose_global_weights(PARENT, [CONTENT, PRICE, OUTLOOK])
        assert [float(x) for x in g] == pytest.approx(EXPECTED_GLOBALS, abs=1e-15)
        assert sum(g[:7]) == Fraction(6, 10)
        assert sum(g[7:11]) == Fraction(3, 10)
        assert sum(g[11:]) == Fraction(1, 10)
        assert sum(g) == 1

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            compose_global_weights([0.5, 0.5], [[1.0]])

    def test_child_not_normalized(self):
        with pytest.raises(ShapeMismatch):
            compose_global_weights([1.0], [[0.5, 0.6]])


class TestFuzzy:
    def test_selector(self):
        assert fuzzy_composite_score([1], [[0, 1, 0, 0]], FOUR_GRADE) == 75

    def test_uniform(self):
        assert fuzzy_composite_score([1], [[0.25] * 4], FOUR_GRADE) == pytest.approx(67.5)

    def test_two_factors(self):
        s = fuzzy_composite_score([0.6, 0.4], [[0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]], FOUR_GRADE)
        assert s == pytest.approx(0.6 * 87.5 + 0.4 * 47.5, abs=1e-12)
        assert s == pytest.approx(71.5, abs=1e-12)

    def test_five_point_preset(self):
        assert fuzzy_composite_score([1], [[0, 0, 1, 0, 0]], FIVE_POINT) == 3

    def test_shape(self):
        with pytest.raises(ShapeMismatch):
            fuzzy_composite_score([0.5, 0.5], [[1, 0, 0, 0]])
        with pytest.raises(ShapeMismatch):
            fuzzy_composite_score([1], [[1, 0, 0]])

    def test_grade_scale_must_decrease(self):
        with pytest.raises(ValueError):
            GradeScale(("a", "b"), (1, 2))

    @staticmethod
    def _rows(draw_rows):
        return [[x / sum(r) for x in r] for r in draw_rows]

    @settings(max_examples=100)
    @given(
        st.lists(st.lists(st.floats(0.01, 1), min_size=4, max_size=4), min_size=1, max_size=6),
        st.data(),
    )
    def test_bounded_and_scale_invariant(self, raw_rows, data):
        rows = self._rows(raw_rows)
        raw_w = data.draw(st.lists(st.floats(0.01, 1), min_size=len(rows), max_size=len(rows)))
        w = [x / sum(raw_w) for x in raw_w]
        s = fuzzy_composite_score(w, rows, FOUR_GRADE)
        assert 35 - 1e-9 <= s <= 100 + 1e-9
        c = data.draw(st.floats(0.1, 10))
        scaled = GradeScale(FOUR_GRADE.labels, tuple(c * g for g in FOUR_GRADE.scores))
        assert fuzzy_composite_score(w, rows, scaled) == pytest.approx(c * s, rel=1e-9)


class TestHierarchy:
    def test_bundled_preset(self):
        doc = json.loads(resources.files("bookrec").joinpath("data/book_factors.json").read_text())
        root = CriterionNode.from_dict(doc["criteria"])
        leaves = leaf_weights(root)
        assert list(leaves.values()) == pytest.approx(EXPECTED_GLOBALS, abs=1e-12)
        results = evaluate_hierarchy(root)
        assert results[0].consistency.acceptable
        assert all(r.consistency.acceptable for r in results if r.consistency)

    def test_missing_matrix(self):
        with pytest.raises(ValueError):
            CriterionNode.from_dict({"name": "x", "children": [{"name": "a"}, {"name": "b"}]})

    def test_single_child_needs_no_matrix(self):
        root = CriterionNode.from_dict({"name": "x", "children": [{"name": "a"}]})
        assert leaf_weights(root) == {"a": 1.0}
