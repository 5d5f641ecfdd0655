import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuzzycf.clustering import ClusterAssignment
from fuzzycf.dataset import profile_users
from fuzzycf.engine import (NeighborList, Recommender, predict, rank_items, recommend_top_n,
                            select_neighbors)
from fuzzycf.oracle import BruteForce, random_ratings
from fuzzycf.similarity import SimilarityContext

from conftest import make_matrix


def one_cluster(n):
    return ClusterAssignment(np.zeros(n, dtype=np.int64), 1)


def test_singleton_cluster_has_no_neighbors():
    a = ClusterAssignment(np.array([0, 1, 1]), 2)
    nl = select_neighbors(0, a, np.ones((3, 3)), 5)
    assert len(nl) == 0


def test_neighbor_tie_rule():
    sims = np.array([[1.0, 0.2, 0.9, 0.2]] * 4)
    nl = select_neighbors(0, one_cluster(4), sims, 2)
    assert nl.indices.tolist() == [2, 1]
    assert nl.similarities.tolist() == [0.9, 0.2]
    assert 0 not in select_neighbors(0, one_cluster(4), sims, 10).indices


def test_neighbors_stay_in_cluster():
    rng = np.random.default_rng(0)
    sims = rng.random((8, 8))
    a = ClusterAssignment(np.array([0, 1, 0, 1, 0, 1, 0, 1]), 2)
    for u in range(8):
        nl = select_neighbors(u, a, sims, 3)
        assert all(a.labels[v] == a.labels[u] for v in nl.indices)
        assert (np.diff(nl.similarities) <= 0).all()


def test_recommender_falls_back_to_all_users():
    m = make_matrix({0: {0: 4}, 1: {0: 5, 1: 3}, 2: {1: 2}})
    eng = Recommender(m, ClusterAssignment(np.array([0, 1, 1]), 2), "cosine", 5)
    nl = eng.neighbors(0)
    assert nl.fallback and sorted(nl.indices.tolist()) == [1, 2]
    assert not eng.neighbors(1).fallback


def _setup(rows, neighbors):
    m = make_matrix(rows)
    prof = profile_users(m)
    idx, sims = zip(*neighbors)
    return m, prof, NeighborList(0, np.array(idx), np.array(sims, dtype=float))


def test_predict_single_neighbor():
    # user 0 mean 3; neighbour 1 mean 4 rated item 2 with 5
    m, prof, nl = _setup({0: {0: 2, 1: 4}, 1: {0: 3, 2: 5, 3: 4}}, [(1, 0.4)])
    p = predict(0, 2, nl, m, prof)
    assert p.rating == pytest.approx(4.0, abs=1e-12) and p.support == 1 and not p.fallback_used


def test_predict_two_neighbors():
    # mu_u = 3, deviations +2 and -1, weights 0.5 and 0.25 -> 3 + 0.75 / 0.75
    m, prof, nl = _setup({0: {0: 2, 1: 4}, 1: {0: 1, 1: 1, 2: 4}, 2: {0: 4, 1: 5, 2: 3}},
                         [(1, 0.5), (2, 0.25)])
    assert prof.means[1] == 2 and prof.means[2] == 4
    p = predict(0, 2, nl, m, prof)
    assert p.raw == pytest.approx(4.0, abs=1e-12) and p.support == 2


def test_predict_fallbacks():
    m, prof, nl = _setup({0: {0: 3, 1: 3, 2: 3, 3: 4, 4: 3}, 1: {0: 3}, 3: {5: 1}}, [(1, 0.9)])
    p = predict(0, 5, nl, m, prof)
    assert p.rating == pytest.approx(3.2) and p.fallback == "user_mean"
    p = predict(2, 1, nl, m, prof)  # user 2 has no ratings
    assert p.rating == pytest.approx(m.global_mean) and p.fallback == "global_mean"


def test_predict_clamps():
    m, prof, nl = _setup({0: {0: 5, 1: 5, 2: 4}, 1: {0: 1, 3: 5}}, [(1, 1.0)])
    p = predict(0, 3, nl, m, prof)
    assert p.raw > 5 and p.rating == 5.0
    m, prof, nl = _setup({0: {0: 1, 1: 1}, 1: {0: 5, 3: 1}}, [(1, 1.0)])
    assert predict(0, 3, nl, m, prof).rating == 1.0


def test_negative_similarity_in_numerator_only():
    m, prof, nl = _setup({0: {0: 2, 1: 4}, 1: {0: 1, 1: 1, 2: 4}, 2: {0: 4, 1: 5, 2: 3}},
                         [(1, -0.5), (2, 0.25)])
    # (2 * -0.5 + -1 * 0.25) / 0.75
    assert predict(0, 2, nl, m, prof).raw == pytest.approx(3 - 1.25 / 0.75, abs=1e-12)


def test_rank_items():
    items = np.array([4, 2, 7, 1])
    scores = np.array([3.0, 4.5, 3.0, 4.5])
    assert rank_items(items, scores, 10).tolist() == [1, 2, 4, 7]
    assert rank_items(items, scores, 0).tolist() == []
    assert rank_items(items, np.full(4, 3.0), 2).tolist() == [1, 2]


def test_recommend_total_tie_orders_by_index():
    # only user 0 in its cluster and no one else rated anything -> all fall back
    m = make_matrix({0: {0: 4}, 1: {1: 2}}, n_items=6)
    eng = Recommender(m, one_cluster(2), "nhsm", 3)
    assert recommend_top_n(0, 3, [5, 3, 2, 1], eng) == [1, 2, 3]
    assert [i for i, _ in eng.recommend(0, 99)] == [1, 2, 3, 4, 5]
    assert eng.recommend(0, 0) == []


def test_predict_many_matches_predict(toy):
    m = make_matrix(toy)
    eng = Recommender(m, one_cluster(5), "pearson", 2)
    for u in range(5):
        scores, codes = eng.predict_many(u, np.arange(6))
        for i in range(6):
            p = eng.predict(u, i)
            assert scores[i] == pytest.approx(p.rating, abs=1e-12)
            assert bool(codes[i]) == p.fallback_used


def test_against_oracle_random():
    rng = random.Random(3)
    for _ in range(40):
        R, n_users, n_items = random_ratings(rng)
        m = make_matrix(R, n_users, n_items)
        eng = Recommender(m, one_cluster(n_users), "nhsm", 3)
        bf = BruteForce(R, n_users)
        for u in range(n_users):
            want = bf.neighbors("nhsm", u, range(n_users), 3)
            assert eng.neighbors(u).indices.tolist() == [v for v, _ in want]
            cands = [i for i in range(n_items) if i not in bf.rated(u)]
            want_top, _ = bf.top_n(u, cands, want, 3)
            assert recommend_top_n(u, 3, cands, eng) == want_top


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), factor=st.floats(1e-3, 1e3))
def test_similarity_scale_invariance(seed, factor):
    R, n_users, n_items = random_ratings(random.Random(seed))
    m = make_matrix(R, n_users, n_items)
    base = Recommender(m, one_cluster(n_users), "nhsm", 3)
    scaled = Recommender(m, one_cluster(n_users), "nhsm", 3, similarities=base.similarities * factor)
    for u in range(n_users):
        a, _ = base.predict_many(u, np.arange(n_items))
        b, _ = scaled.predict_many(u, np.arange(n_items))
        np.testing.assert_allclose(a, b, atol=1e-12)
        assert ((a >= 1) & (a <= 5)).all()
