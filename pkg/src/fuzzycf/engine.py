"""In-cluster neighbour selection, rating prediction and Top-N ranking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import ClusterAssignment
from .dataset import RatingsMatrix, UserProfiles, profile_users
from .similarity import SimilarityContext, get_measure

FALLBACK_USER_MEAN = "user_mean"
FALLBACK_GLOBAL_MEAN = "global_mean"


@dataclass(frozen=True)
class NeighborList:
    user: int
    indices: np.ndarray
    similarities: np.ndarray
    fallback: bool = False  # drawn from all users because the cluster had no one else

    def __len__(self):
        return len(self.indices)

    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.similarities.tolist()))


@dataclass(frozen=True)
class Prediction:
    user: int
    item: int
    rating: float
    raw: float
    support: int
    fallback: str | None = None

    @property
    def fallback_used(self) -> bool:
        return self.fallback is not None


def _top_k(u: int, candidates: np.ndarray, sim_row: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    candidates = candidates[candidates != u]
    sims = sim_row[candidates]
    order = np.lexsort((candidates, -sims))[:k]
    return candidates[order], sims[order]


def select_neighbors(u: int, assignment: ClusterAssignment, similarities: np.ndarray,
                     k: int) -> NeighborList:
    """The ``k`` most similar users sharing ``u``'s cluster.

    ``similarities`` is the all-pairs matrix (or ``u``'s row). Ties are
    broken by ascending user index; ``u`` itself is never included.
    """
    row = similarities[u] if np.ndim(similarities) == 2 else np.asarray(similarities)
    idx, sims = _top_k(u, assignment.members_of(u), row, k)
    return NeighborList(u, idx, sims)


def _clamp(x, scale):
    return np.minimum(np.maximum(x, scale.min), scale.max)


def predict(u: int, i: int, neighbors: NeighborList, train: RatingsMatrix,
            profiles: UserProfiles) -> Prediction:
    """Mean-centred weighted vote of the neighbours that rated ``i``."""
    mu_u = float(profiles.means[u])
    if profiles.empty[u]:
        g = train.global_mean
        return Prediction(u, i, g, g, 0, FALLBACK_GLOBAL_MEAN)
    num = den = 0.0
    support = 0
    mask, dense = train.mask, train.dense
    for v, s in zip(neighbors.indices.tolist(), neighbors.similarities.tolist()):
        if mask[v, i]:
            num += (dense[v, i] - profiles.means[v]) * s
            den += abs(s)
            support += 1
    if support == 0 or den == 0:
        return Prediction(u, i, mu_u, mu_u, support, FALLBACK_USER_MEAN)
    raw = mu_u + num / den
    return Prediction(u, i, float(_clamp(raw, train.scale)), raw, support)


def rank_items(items: np.ndarray, scores: np.ndarray, n: int) -> np.ndarray:
    """Items by descending score, ties by ascending item index, first ``n``."""
    if n <= 0:
        return items[:0]
    order = np.lexsort((items, -scores))
    return items[order[:n]]


class Recommender:
    """A fitted neighbourhood model over one train fold.

    Holds the train matrix, its aggregates, the crisp clustering and the
    all-pairs similarity matrix for one measure.
    """

    def __init__(self, train: RatingsMatrix, assignment: ClusterAssignment,
                 measure: str = "nhsm", neighbor_count: int = 50,
                 context: SimilarityContext | None = None,
                 similarities: np.ndarray | None = None):
        if neighbor_count < 1:
            raise ValueError("neighbor_count must be >= 1")
        if len(assignment.labels) != train.n_users:
            raise ValueError("assignment does not cover every user of the train matrix")
        self.train = train
        self.assignment = assignment
        self.measure = get_measure(measure)
        self.neighbor_count = neighbor_count
        self.context = context if context is not None else SimilarityContext(train)
        self.profiles = self.context.profiles
        self.similarities = (similarities if similarities is not None
                             else self.measure.matrix(self.context))
        self._neighbors: dict[int, NeighborList] = {}

    def neighbors(self, u: int) -> NeighborList:
        nl = self._neighbors.get(u)
        if nl is None:
            nl = select_neighbors(u, self.assignment, self.similarities, self.neighbor_count)
            if len(nl) == 0 and self.train.n_users > 1:
                idx, sims = _top_k(u, np.arange(self.train.n_users), self.similarities[u],
                                   self.neighbor_count)
                nl = NeighborList(u, idx, sims, fallback=True)
            self._neighbors[u] = nl
        return nl

    def predict(self, u: int, i: int) -> Prediction:
        return predict(u, i, self.neighbors(u), self.train, self.profiles)

    def predict_many(self, u: int, items) -> tuple[np.ndarray, np.ndarray]:
        """Clamped predictions for several items plus per-item fallback codes.

        Codes: 0 = neighbourhood vote, 1 = user mean, 2 = global mean.
        """
        items = np.asarray(items, dtype=np.int64)
        if self.profiles.empty[u]:
            return np.full(len(items), self.train.global_mean), np.full(len(items), 2)
        nl = self.neighbors(u)
        mu_u = self.profiles.means[u]
        if len(nl) == 0:
            return np.full(len(items), mu_u), np.ones(len(items), dtype=np.int64)
        rated = self.train.mask[np.ix_(nl.indices, items)]
        dev = (self.train.dense[np.ix_(nl.indices, items)]
               - self.profiles.means[nl.indices][:, None]) * rated
        s = nl.similarities[:, None]
        num = (dev * s).sum(axis=0)
        den = (rated * np.abs(s)).sum(axis=0)
        ok = den != 0
        raw = np.full(len(items), mu_u)
        raw[ok] = mu_u + num[ok] / den[ok]
        return _clamp(raw, self.train.scale), (~ok).astype(np.int64)

    def recommend(self, u: int, n: int, candidates=None) -> list[tuple[int, float]]:
        """Top-``n`` (item, predicted rating); default candidates: items unrated in train."""
        if candidates is None:
            candidates = np.flatnonzero(~self.train.mask[u])
        candidates = np.asarray(candidates, dtype=np.int64)
        scores, _ = self.predict_many(u, candidates)
        top = rank_items(candidates, scores, n)
        lookup = dict(zip(candidates.tolist(), scores.tolist()))
        return [(int(i), lookup[int(i)]) for i in top]


def recommend_top_n(u: int, n: int, candidates, engine: Recommender) -> list[int]:
    return [i for i, _ in engine.recommend(u, n, candidates)]
