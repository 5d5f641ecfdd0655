import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuzzycf.dataset import RatingScale
from fuzzycf.oracle import BruteForce, random_ratings
from fuzzycf.similarity import (MEASURES, SimilarityContext, cosine_sim, get_measure,
                                herlocker_weighted, jaccard_mod, jpss_sim, mclaughlin_weighted,
                                nhsm_sim, pearson_sim, proximity, pss_sim, ra_sim, significance,
                                singularity, urp, urp_sim)

from conftest import make_matrix

GRID = list(itertools.product(range(1, 6), repeat=2))


def ctx_for(rows, **kw):
    return SimilarityContext(make_matrix(rows), **kw)


@pytest.mark.parametrize("a, b, expected", [
    (4, 4, 0.5),
    (1, 5, 0.0179862099620915580),
    (2, 3, 0.268941421369995121),
])
def test_proximity(a, b, expected):
    assert proximity(a, b) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("a, b, expected", [
    (3, 5, 0.5),
    (5, 1, 0.982013790037908442),
    (4, 4, 0.731058578630004879),
])
def test_significance(a, b, expected):
    assert significance(a, b, 3.0) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("a, b, mu, expected", [
    (4, 2, 3.0, 0.5),
    (5, 5, 3.0, 0.119202922022117556),
    (1, 1, 1.0, 0.5),
])
def test_singularity(a, b, mu, expected):
    assert singularity(a, b, mu) == pytest.approx(expected, abs=1e-15)


def test_singularity_printed_form():
    # literal exponent (r_up + r_vp - mu_p) / 2, no absolute value
    assert singularity(4, 2, 3.0, "printed") == pytest.approx(1 - 1 / (1 + math.exp(-1.5)), abs=1e-15)
    with pytest.raises(ValueError):
        singularity(1, 1, 1.0, "other")


def test_urp_values():
    assert urp(3.0, 3.0, 0.1, 2.0) == 0.5
    assert urp(1.0, 3.0, 0.5, 1.5) == pytest.approx(0.119202922022117556, abs=1e-15)
    assert urp(1.0, 4.5, 0.7, 0.7) == 0.5


def test_kernel_ranges_on_grid():
    rng = np.random.default_rng(1)
    for a, b in GRID:
        assert 0 < proximity(a, b) <= 0.5
        assert 0.5 <= significance(a, b, 3.0) < 1
        for mu in rng.uniform(1, 5, 20):
            assert 0 < singularity(a, b, mu) <= 0.5
    for mu_u, mu_v, s_u, s_v in rng.uniform(0, 5, (200, 4)):
        assert 0 < urp(mu_u, mu_v, s_u, s_v) <= 0.5


def test_proximity_strictly_decreasing():
    vals = [proximity(1, 1 + d) for d in range(5)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_pss_and_jaccard_basics():
    ctx = ctx_for({0: {0: 4, 1: 3}, 1: {1: 2, 2: 5}, 2: {3: 1}})
    assert pss_sim(0, 2, ctx) == 0.0
    assert jaccard_mod(0, 1, ctx) == 0.25
    assert jaccard_mod(0, 2, ctx) == 0.0
    assert jaccard_mod(0, 0, ctx) == 0.5
    assert nhsm_sim(0, 2, ctx) == 0.0


def test_pss_single_item_all_halves():
    # ratings (3, 3) with item mean 3: proximity 0.5, significance 0.5, singularity 0.5
    ctx = ctx_for({0: {0: 3}, 1: {0: 3}})
    assert pss_sim(0, 1, ctx) == 0.125


def test_pss_against_hand_sum():
    rows = {0: {0: 5, 1: 2, 2: 4}, 1: {0: 3, 1: 2, 2: 1}, 2: {0: 4, 2: 5}}
    ctx = ctx_for(rows)
    mu = {0: 4.0, 1: 2.0, 2: 10 / 3}
    L = lambda x: 1 / (1 + math.exp(-x))
    want = 0.0
    for p in (0, 1, 2):
        a, b = rows[0][p], rows[1][p]
        want += (1 - L(abs(a - b))) * L(abs(a - 3) * abs(b - 3)) * (1 - L(abs((a + b) / 2 - mu[p])))
    assert pss_sim(0, 1, ctx) == pytest.approx(want, abs=1e-12)
    assert jpss_sim(0, 1, ctx) == pytest.approx(want * 3 / 9, abs=1e-12)


def test_pss_mean_aggregation():
    rows = {0: {0: 5, 1: 2, 2: 4}, 1: {0: 3, 1: 2, 2: 1}}
    total = pss_sim(0, 1, ctx_for(rows))
    mean_ctx = ctx_for(rows, pss_aggregation="mean")
    assert pss_sim(0, 1, mean_ctx) == pytest.approx(total / 3, abs=1e-15)
    assert get_measure("nhsm").matrix(mean_ctx)[0, 1] == pytest.approx(nhsm_sim(0, 1, mean_ctx), abs=1e-15)


def test_nhsm_self_pair(toy):
    ctx = ctx_for(toy)
    for u in toy:
        assert nhsm_sim(u, u, ctx) == pytest.approx(jaccard_mod(u, u, ctx) * pss_sim(u, u, ctx) * 0.5, abs=1e-15)
        assert urp_sim(u, u, ctx) == 0.5


def test_nhsm_toy_matches_oracle(toy):
    ctx = ctx_for(toy)
    bf = BruteForce(toy, 5)
    S = get_measure("nhsm").matrix(ctx)
    for u, v in itertools.product(range(5), repeat=2):
        assert nhsm_sim(u, v, ctx) == pytest.approx(bf.nhsm(u, v), abs=1e-12)
        assert S[u, v] == pytest.approx(bf.nhsm(u, v), abs=1e-12)
        assert nhsm_sim(u, v, ctx) == pytest.approx(
            pss_sim(u, v, ctx) * jaccard_mod(u, v, ctx) * urp_sim(u, v, ctx), abs=1e-12)


def test_pearson_cases():
    ctx = SimilarityContext(make_matrix({0: {0: 1, 1: 2, 2: 3}, 1: {0: 2, 1: 4, 2: 6}, 2: {0: 3, 1: 2, 2: 1},
                   3: {0: 1, 1: 2, 2: 3}, 4: {0: 4}, 5: {0: 2, 1: 2, 2: 2}}, scale=RatingScale(1, 6)))
    assert pearson_sim(0, 1, ctx) == pytest.approx(1.0, abs=1e-15)
    assert pearson_sim(0, 3, ctx) == pytest.approx(1.0, abs=1e-15)
    assert pearson_sim(0, 2, ctx) == pytest.approx(-1.0, abs=1e-15)
    assert pearson_sim(0, 4, ctx) == 0.0  # one co-rated item
    assert pearson_sim(0, 5, ctx) == 0.0  # zero variance


def test_cosine_cases():
    ctx = ctx_for({0: {0: 1, 1: 2}, 1: {0: 2, 1: 4}, 2: {0: 2, 1: 1}, 3: {2: 5}})
    assert cosine_sim(0, 1, ctx) == pytest.approx(1.0, abs=1e-15)
    assert cosine_sim(0, 2, ctx) == pytest.approx(0.8, abs=1e-15)  # (2+2)/(sqrt5*sqrt5)
    assert cosine_sim(0, 3, ctx) == 0.0


def test_weighted_pearson_variants():
    # 4 co-rated items, gamma = 8 -> half weight; gamma = 4 -> full; gamma = 2 -> full
    rows = {0: {0: 1, 1: 2, 2: 4, 3: 5}, 1: {0: 2, 1: 1, 2: 5, 3: 4}, 2: {4: 1}}
    for gamma, factor in ((8, 0.5), (4, 1.0), (2, 1.0)):
        ctx = ctx_for(rows, gamma=gamma)
        base = pearson_sim(0, 1, ctx)
        assert base != 0
        assert herlocker_weighted(0, 1, ctx) == pytest.approx(base * factor, abs=1e-15)
        assert mclaughlin_weighted(0, 1, ctx) == pytest.approx(base * factor, abs=1e-15)
        assert herlocker_weighted(0, 2, ctx) == mclaughlin_weighted(0, 2, ctx) == 0.0


def test_ra_cases():
    ctx = ctx_for({0: {0: 3, 1: 4}, 1: {0: 5}, 2: {1: 1, 2: 2}, 3: {3: 2}})
    assert ra_sim(0, 3, ctx) == 0.0
    assert ra_sim(0, 1, ctx) == 0.5
    assert ra_sim(0, 2, ctx) == 0.5


def test_get_measure_unknown():
    with pytest.raises(ValueError, match="valid: nhsm, pearson"):
        get_measure("pip")


@pytest.mark.parametrize("name", list(MEASURES))
def test_symmetry_and_matrix_agreement(name):
    rng = random.Random(17)
    measure = get_measure(name)
    for _ in range(10):
        R, n_users, n_items = random_ratings(rng)
        ctx = SimilarityContext(make_matrix(R, n_users, n_items), gamma=3)
        S = measure.matrix(ctx)
        assert np.array_equal(S, S.T)
        for u, v in itertools.product(range(n_users), repeat=2):
            assert measure.pair(u, v, ctx) == measure.pair(v, u, ctx)
            assert S[u, v] == pytest.approx(measure.pair(u, v, ctx), abs=1e-12)


def test_oracle_equivalence_nhsm_100_trials():
    rng = random.Random(99)
    for _ in range(100):
        R, n_users, n_items = random_ratings(rng, max_users=6, max_items=8)
        ctx = SimilarityContext(make_matrix(R, n_users, n_items))
        S = get_measure("nhsm").matrix(ctx)
        bf = BruteForce(R, n_users)
        for u, v in itertools.product(range(n_users), repeat=2):
            assert abs(S[u, v] - bf.nhsm(u, v)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5)), min_size=1, max_size=8))
def test_nhsm_nonnegative(pairs):
    rows = {0: {i: a for i, (a, _) in enumerate(pairs)}, 1: {i: b for i, (_, b) in enumerate(pairs)}}
    ctx = ctx_for(rows)
    assert nhsm_sim(0, 1, ctx) >= 0
    assert nhsm_sim(0, 1, ctx) == nhsm_sim(1, 0, ctx)
