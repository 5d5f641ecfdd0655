"""User-user similarity measures: the NHSM family and the baseline measures.

Every measure exists in two forms: a pair function ``f(u, v, ctx)`` that
works directly on the two users' co-rated items, and an all-pairs matrix
builder used by the engine. Both read only train-fold aggregates held by a
:class:`SimilarityContext`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import sparse

from .dataset import (ItemStatistics, RatingsMatrix, UserProfiles, profile_items,
                      profile_users)

SINGULARITY_FORMS = ("absolute", "printed")
PSS_AGGREGATIONS = ("sum", "mean")


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def proximity(r_up, r_vp):
    """1 - 1/(1 + exp(-|r_up - r_vp|)); in (0, 0.5]."""
    return 1.0 - _logistic(np.abs(np.subtract(r_up, r_vp)))


def significance(r_up, r_vp, r_med):
    """1/(1 + exp(-|r_up - r_med| * |r_vp - r_med|)); in [0.5, 1)."""
    return _logistic(np.abs(np.subtract(r_up, r_med)) * np.abs(np.subtract(r_vp, r_med)))


def singularity(r_up, r_vp, mu_p, form: str = "absolute"):
    """Distance of the pair's mean rating from the item mean, squashed.

    ``form="absolute"`` uses ``|(r_up + r_vp)/2 - mu_p|`` (range (0, 0.5]);
    ``form="printed"`` uses the signed ``(r_up + r_vp - mu_p)/2``.
    """
    if form == "absolute":
        x = np.abs(np.add(r_up, r_vp) / 2.0 - mu_p)
    elif form == "printed":
        x = (np.add(r_up, r_vp) - mu_p) / 2.0
    else:
        raise ValueError(f"unknown singularity form {form!r}")
    return 1.0 - _logistic(x)


def urp(mean_u, mean_v, std_u, std_v):
    """1 - 1/(1 + exp(-|mean_u - mean_v| * |std_u - std_v|)); in (0, 0.5]."""
    x = np.abs(np.subtract(mean_u, mean_v)) * np.abs(np.subtract(std_u, std_v))
    return 1.0 - _logistic(x)


class SimilarityContext:
    """Train-fold data and aggregates shared by every measure."""

    def __init__(self, train: RatingsMatrix, *, singularity_form: str = "absolute",
                 pss_aggregation: str = "sum", gamma: int = 50,
                 profiles: UserProfiles | None = None, stats: ItemStatistics | None = None):
        if singularity_form not in SINGULARITY_FORMS:
            raise ValueError(f"singularity_form must be one of {SINGULARITY_FORMS}")
        if pss_aggregation not in PSS_AGGREGATIONS:
            raise ValueError(f"pss_aggregation must be one of {PSS_AGGREGATIONS}")
        if gamma < 1:
            raise ValueError("gamma must be >= 1")
        self.train = train
        self.singularity_form = singularity_form
        self.pss_aggregation = pss_aggregation
        self.gamma = gamma
        self.profiles = profiles if profiles is not None else profile_users(train)
        self.stats = stats if stats is not None else profile_items(train)

    @property
    def n_users(self) -> int:
        return self.train.n_users

    def co_rated(self, u: int, v: int):
        """(items, ratings of u, ratings of v) over items both rated, ascending."""
        csr = self.train.csr
        iu, ru = csr.indices[csr.indptr[u]:csr.indptr[u + 1]], csr.data[csr.indptr[u]:csr.indptr[u + 1]]
        iv, rv = csr.indices[csr.indptr[v]:csr.indptr[v + 1]], csr.data[csr.indptr[v]:csr.indptr[v + 1]]
        items, pu, pv = np.intersect1d(iu, iv, assume_unique=True, return_indices=True)
        return items, ru[pu], rv[pv]

    @cached_property
    def binary(self) -> sparse.csr_matrix:
        b = self.train.csr.copy()
        b.data[:] = 1.0
        return b

    @cached_property
    def overlap(self) -> np.ndarray:
        return (self.binary @ self.binary.T).toarray()

    def rating_indicator(self, value: int) -> sparse.csr_matrix:
        t = self.train
        sel = t.ratings == value
        return sparse.csr_matrix((np.ones(int(sel.sum())), (t.users[sel], t.items[sel])),
                                 shape=(t.n_users, t.n_items))


# pair functions

def pss_sim(u: int, v: int, ctx: SimilarityContext) -> float:
    items, ru, rv = ctx.co_rated(u, v)
    if len(items) == 0:
        return 0.0
    med = ctx.train.scale.median
    terms = (proximity(ru, rv) * significance(ru, rv, med)
             * singularity(ru, rv, ctx.stats.means[items], ctx.singularity_form))
    total = float(np.sum(terms))
    if ctx.pss_aggregation == "mean":
        return total / len(items)
    return total


def jaccard_mod(u: int, v: int, ctx: SimilarityContext) -> float:
    nu, nv = ctx.profiles.counts[u], ctx.profiles.counts[v]
    if nu == 0 or nv == 0:
        return 0.0
    return len(ctx.co_rated(u, v)[0]) / float(nu * nv)


def jpss_sim(u: int, v: int, ctx: SimilarityContext) -> float:
    return pss_sim(u, v, ctx) * jaccard_mod(u, v, ctx)


def urp_sim(u: int, v: int, ctx: SimilarityContext) -> float:
    p = ctx.profiles
    return float(urp(p.means[u], p.means[v], p.stds[u], p.stds[v]))


def nhsm_sim(u: int, v: int, ctx: SimilarityContext) -> float:
    return jpss_sim(u, v, ctx) * urp_sim(u, v, ctx)


def pearson_sim(u: int, v: int, ctx: SimilarityContext) -> float:
    _, ru, rv = ctx.co_rated(u, v)
    if len(ru) < 2:
        return 0.0
    du, dv = ru - ru.mean(), rv - rv.mean()
    den = np.sqrt(np.sum(du * du) * np.sum(dv * dv))
    if den == 0:
        return 0.0
    return float(np.sum(du * dv) / den)


def cosine_sim(u: int, v: int, ctx: SimilarityContext) -> float:
    _, ru, rv = ctx.co_rated(u, v)
    if len(ru) == 0:
        return 0.0
    den = np.sqrt(np.sum(ru * ru) * np.sum(rv * rv))
    if den == 0:
        return 0.0
    return float(np.sum(ru * rv) / den)


def herlocker_weighted(u: int, v: int, ctx: SimilarityContext) -> float:
    n = len(ctx.co_rated(u, v)[0])
    return pearson_sim(u, v, ctx) * min(n, ctx.gamma) / ctx.gamma


def mclaughlin_weighted(u: int, v: int, ctx: SimilarityContext) -> float:
    n = len(ctx.co_rated(u, v)[0])
    if n == 0:
        return 0.0
    return pearson_sim(u, v, ctx) * n / max(n, ctx.gamma)


def ra_sim(u: int, v: int, ctx: SimilarityContext) -> float:
    items, _, _ = ctx.co_rated(u, v)
    if len(items) == 0:
        return 0.0
    return float(np.sum(1.0 / ctx.stats.counts[items]))


# all-pairs matrices

def _symmetric(s: np.ndarray) -> np.ndarray:
    return (s + s.T) / 2.0


def _ratio(num: np.ndarray, den: np.ndarray, valid: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=valid & (den != 0))
    return out


def pss_matrix(ctx: SimilarityContext) -> np.ndarray:
    scale = ctx.train.scale
    med = scale.median
    values = range(scale.min, scale.max + 1)
    indicators = {a: ctx.rating_indicator(a) for a in values}
    mu = ctx.stats.means
    total = np.zeros((ctx.n_users, ctx.n_users))
    for a in values:
        for b in values:
            if b < a:
                continue
            weight = float(proximity(a, b) * significance(a, b, med))
            per_item = sparse.diags(singularity(a, b, mu, ctx.singularity_form))
            term = (indicators[a] @ per_item @ indicators[b].T).toarray()
            if a == b:
                total += weight * term
            else:
                total += weight * (term + term.T)
    total = _symmetric(total)
    if ctx.pss_aggregation == "mean":
        total = _ratio(total, ctx.overlap, ctx.overlap > 0)
    return total


def jaccard_matrix(ctx: SimilarityContext) -> np.ndarray:
    counts = ctx.profiles.counts.astype(np.float64)
    return _ratio(ctx.overlap, np.outer(counts, counts), np.ones_like(ctx.overlap, dtype=bool))


def urp_matrix(ctx: SimilarityContext) -> np.ndarray:
    p = ctx.profiles
    return urp(p.means[:, None], p.means[None, :], p.stds[:, None], p.stds[None, :])


def nhsm_matrix(ctx: SimilarityContext) -> np.ndarray:
    return pss_matrix(ctx) * jaccard_matrix(ctx) * urp_matrix(ctx)


def _co_rated_sums(ctx: SimilarityContext):
    """n, sum_x, sum_xx, sum_xy over co-rated items; row user is x."""
    b, r = ctx.binary, ctx.train.csr
    r2 = r.multiply(r).tocsr()
    n = ctx.overlap
    sx = (r @ b.T).toarray()
    sxx = (r2 @ b.T).toarray()
    sxy = (r @ r.T).toarray()
    return n, sx, sxx, sxy


def pearson_matrix(ctx: SimilarityContext) -> np.ndarray:
    n, sx, sxx, sxy = _co_rated_sums(ctx)
    sy, syy = sx.T, sxx.T
    # integer-valued sums: numerator and variance terms are exact
    num = n * sxy - sx * sy
    var_x = n * sxx - sx * sx
    var_y = n * syy - sy * sy
    den = np.sqrt(var_x * var_y)
    valid = (n >= 2) & (var_x > 0) & (var_y > 0)
    return _symmetric(_ratio(num, den, valid))


def cosine_matrix(ctx: SimilarityContext) -> np.ndarray:
    n, _, sxx, sxy = _co_rated_sums(ctx)
    den = np.sqrt(sxx * sxx.T)
    return _symmetric(_ratio(sxy, den, n > 0))


def herlocker_matrix(ctx: SimilarityContext) -> np.ndarray:
    n = ctx.overlap
    return pearson_matrix(ctx) * (np.minimum(n, ctx.gamma) / ctx.gamma)


def mclaughlin_matrix(ctx: SimilarityContext) -> np.ndarray:
    n = ctx.overlap
    return pearson_matrix(ctx) * _ratio(n, np.maximum(n, ctx.gamma), n > 0)


def ra_matrix(ctx: SimilarityContext) -> np.ndarray:
    counts = ctx.stats.counts.astype(np.float64)
    inv = np.zeros_like(counts)
    np.divide(1.0, counts, out=inv, where=counts > 0)
    b = ctx.binary
    return _symmetric((b @ sparse.diags(inv) @ b.T).toarray())


@dataclass(frozen=True)
class SimilarityMeasure:
    identifier: str
    pair: Callable[[int, int, SimilarityContext], float]
    matrix: Callable[[SimilarityContext], np.ndarray]

    def evaluate(self, u: int, v: int, ctx: SimilarityContext) -> float:
        return self.pair(u, v, ctx)


MEASURES = {
    m.identifier: m for m in (
        SimilarityMeasure("nhsm", nhsm_sim, nhsm_matrix),
        SimilarityMeasure("pearson", pearson_sim, pearson_matrix),
        SimilarityMeasure("cosine", cosine_sim, cosine_matrix),
        SimilarityMeasure("herlocker_weighted", herlocker_weighted, herlocker_matrix),
        SimilarityMeasure("mclaughlin_weighted", mclaughlin_weighted, mclaughlin_matrix),
        SimilarityMeasure("ra", ra_sim, ra_matrix),
    )
}


def get_measure(identifier: str) -> SimilarityMeasure:
    try:
        return MEASURES[identifier]
    except KeyError:
        raise ValueError(
            f"unknown similarity measure {identifier!r}; valid: {', '.join(MEASURES)}") from None
