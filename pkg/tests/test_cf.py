import random
from types import MappingProxyType

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bookrec.cf import (
    NeighborSet,
    UserProfile,
    nwde_neighbors,
    predict_rating_cf,
    tag_knn_predict,
    top_n_recommend,
)
from bookrec.errors import NoCandidates, NoSimilarBooks
from bookrec.ratings import RatingMatrix, TagCatalog, mean_rating
from bookrec.similarity import rating_diff, weighted_diff_entropy
from bookrec.synthetic import random_matrix

SAME_TAG_SCORES = {199155: 2, 232671: 4, 318311: 4, 479614: 4, 997265: 4}
TARGET = 794171
USER = 7245481


def catalog(mapping):
    return TagCatalog(MappingProxyType({b: tuple(t) for b, t in mapping.items()}))


@pytest.fixture
def same_tag_books():
    m = RatingMatrix({(USER, b): s for b, s in SAME_TAG_SCORES.items()} | {(USER, 1): 1, (42, TARGET): 5})
    tags = {b: ("novel", "history") for b in SAME_TAG_SCORES}
    tags[TARGET] = ("novel",)
    tags[1] = ("cooking",)
    return m, catalog(tags)


class TestTagKnn:
    def test_mostly_fours(self, same_tag_books):
        m, tags = same_tag_books
        assert tag_knn_predict(USER, TARGET, m, tags, k=5) == 4

    def test_unanimous(self):
        m = RatingMatrix({(1, b): 3 for b in (10, 11, 12)})
        tags = catalog({10: ["a"], 11: ["a"], 12: ["a"], 99: ["a"]})
        assert tag_knn_predict(1, 99, m, tags) == 3

    def test_no_shared_first_tag(self, same_tag_books):
        m, tags = same_tag_books
        tags = catalog({**tags.tags, TARGET: ("poetry", "novel")})
        with pytest.raises(NoSimilarBooks):
            tag_knn_predict(USER, TARGET, m, tags)

    def test_untagged_target(self, same_tag_books):
        m, tags = same_tag_books
        with pytest.raises(NoSimilarBooks):
            tag_knn_predict(USER, 123, m, tags)

    def test_known_rating_passes_through(self, same_tag_books):
        m, tags = same_tag_books
        assert tag_knn_predict(USER, 232671, m, tags) == 4

    def test_k_keeps_most_tag_overlap(self):
        m = RatingMatrix({(1, 10): 2, (1, 11): 5, (1, 12): 5})
        tags = catalog({10: ["a", "x", "y"], 11: ["a"], 12: ["a"], 99: ["a", "x", "y"]})
        assert tag_knn_predict(1, 99, m, tags, k=1) == 2
        assert tag_knn_predict(1, 99, m, tags, k=3) == 5

    def test_tie_goes_to_score_nearest_mean(self):
        # 2 and 5 tie; book 50 pulls the user mean down to 8/3
        m = RatingMatrix({(1, 10): 2, (1, 11): 5, (1, 50): 1})
        tags = catalog({10: ["a"], 11: ["a"], 50: ["b"], 99: ["a"]})
        assert tag_knn_predict(1, 99, m, tags) == 2

    @settings(max_examples=100)
    @given(st.lists(st.integers(1, 5), min_size=1, max_size=12), st.integers(1, 12))
    def test_prediction_is_a_neighbour_score(self, scores, k):
        m = RatingMatrix({(1, 100 + i): s for i, s in enumerate(scores)})
        tags = catalog({**{100 + i: ["t"] for i in range(len(scores))}, 1: ["t"]})
        assert tag_knn_predict(1, 1, m, tags, k) in scores


def brute_force_wde(m, a, b):
    common = sorted(set(m.user_ratings(a)) & set(m.user_ratings(b)))
    return weighted_diff_entropy(rating_diff([m.rating(a, x) for x in common], [m.rating(b, x) for x in common]))


class TestNeighbors:
    def test_two_users(self):
        m = RatingMatrix({(1, 10): 3, (2, 10): 5})
        nb = nwde_neighbors(1, m, k=3)
        assert nb.neighbors == ((2, 1.0),)

    def test_k_larger_than_population(self):
        m = random_matrix(6, 5, density=1.0, seed=1)
        assert len(nwde_neighbors(0, m, k=50)) == 5

    def test_identical_beats_opposite(self):
        m = RatingMatrix(
            {(1, 10): 5, (1, 11): 1, (2, 10): 5, (2, 11): 1, (3, 10): 1, (3, 11): 5, (4, 10): 4, (4, 11): 2}
        )
        assert brute_force_wde(m, 1, 2) == 0.0
        assert brute_force_wde(m, 1, 3) == pytest.approx(2.0)
        nb = nwde_neighbors(1, m, k=3)
        order = [u for u, _ in nb.neighbors]
        assert order.index(2) < order.index(3)
        assert dict(nb.neighbors)[2] == 1.0 and dict(nb.neighbors)[3] == 0.0

    def test_no_candidates(self):
        m = RatingMatrix({(1, 10): 3, (2, 11): 5})
        with pytest.raises(NoCandidates):
            nwde_neighbors(1, m)

    def test_disjoint_users_excluded(self):
        m = RatingMatrix({(1, 10): 3, (2, 10): 5, (3, 11): 4})
        assert [u for u, _ in nwde_neighbors(1, m).neighbors] == [2]

    @pytest.mark.parametrize("seed", range(5))
    def test_order_independent(self, seed):
        m = random_matrix(20, 15, density=0.4, seed=seed)
        triples = m.triples()
        random.Random(seed).shuffle(triples)
        shuffled = RatingMatrix.from_triples(triples)
        for u in m.users:
            nb = nwde_neighbors(u, m, k=5)
            assert nb == nwde_neighbors(u, shuffled, k=5)
            sims = [s for _, s in nb.neighbors]
            assert sims == sorted(sims, reverse=True)
            assert all(0.0 <= s <= 1.0 for s in sims)
            assert len(nb) <= 5


class TestPredict:
    def test_single_neighbour(self):
        m = RatingMatrix({(1, 10): 3, (1, 11): 4, (2, 10): 2, (2, 11): 3, (2, 12): 4})
        nb = NeighborSet(1, ((2, 1.0),), 5)
        assert predict_rating_cf(1, 12, nb, m) == pytest.approx(4.5, abs=1e-12)

    def test_neighbours_at_their_mean(self):
        m = RatingMatrix({(1, 10): 2, (1, 11): 5, (2, 12): 3, (2, 13): 3, (3, 12): 4, (3, 14): 4})
        nb = NeighborSet(1, ((2, 0.7), (3, 0.2)), 5)
        assert predict_rating_cf(1, 12, nb, m) == pytest.approx(3.5, abs=1e-12)

    def test_no_neighbour_rated(self):
        m = RatingMatrix({(1, 10): 2, (1, 11): 5, (2, 10): 3})
        nb = NeighborSet(1, ((2, 1.0),), 5)
        # formula's neighbour sum is empty, leaving only the target mean
        assert predict_rating_cf(1, 99, nb, m) == mean_rating(m, 1)

    def test_zero_similarity_falls_back(self):
        m = RatingMatrix({(1, 10): 2, (1, 11): 5, (2, 12): 5})
        nb = NeighborSet(1, ((2, 0.0),), 5)
        assert predict_rating_cf(1, 12, nb, m) == 3.5

    def test_clamped(self):
        m = RatingMatrix({(1, 10): 5, (2, 10): 1, (2, 11): 5})
        nb = NeighborSet(1, ((2, 1.0),), 5)
        assert predict_rating_cf(1, 11, nb, m, clamp=False) == pytest.approx(7.0)
        assert predict_rating_cf(1, 11, nb, m) == 5.0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 100_000), st.integers(1, 2))
    def test_translation(self, seed, c):
        m = random_matrix(15, 12, density=0.4, seed=seed, low=1, high=3)
        shifted = RatingMatrix({k: v + c for k, v in m.entries.items()})
        for u in m.users[:5]:
            nb = nwde_neighbors(u, m)
            nb2 = nwde_neighbors(u, shifted)
            assert nb == nb2
            for b in range(12):
                raw = predict_rating_cf(u, b, nb, m, clamp=False)
                raw2 = predict_rating_cf(u, b, nb2, shifted, clamp=False)
                assert raw2 == pytest.approx(raw + c, abs=1e-9)


class TestTopN:
    def test_three_unread(self):
        m = random_matrix(10, 12, density=0.3, seed=3)
        recs = top_n_recommend(0, 3, m, nwde_neighbors(0, m))
        assert len(recs) == 3
        assert not set(recs.books) & set(m.user_ratings(0))

    def test_rated_everything(self):
        m = RatingMatrix({(1, 10): 3, (1, 11): 4, (2, 10): 5})
        assert len(top_n_recommend(1, 3, m)) == 0

    def test_tie_by_book_id(self):
        m = RatingMatrix({(1, 10): 3, (2, 10): 3, (2, 12): 3, (2, 11): 3})
        recs = top_n_recommend(1, 5, m)
        assert recs.books == [11, 12]

    def test_descending(self):
        m = random_matrix(20, 20, density=0.3, seed=9)
        scores = [s for _, s in top_n_recommend(4, 10, m).items]
        assert scores == sorted(scores, reverse=True)

    @pytest.mark.parametrize("seed", range(3))
    def test_never_recommends_rated(self, seed):
        m = random_matrix(15, 15, density=0.5, seed=seed)
        for u in m.users:
            recs = top_n_recommend(u, 15, m)
            assert not set(recs.books) & set(m.user_ratings(u))
            assert len(recs) == 15 - len(m.user_ratings(u))

    def test_profile(self):
        m = RatingMatrix({(1, 10): 3, (2, 11): 4})
        p = UserProfile.of(1, m)
        assert p.rated == {10} and p.unrated == {11}
        assert p.item_space == {10, 11}
