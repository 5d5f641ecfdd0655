"""Fuzzy C-means over user rating vectors and crisp defuzzification."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import RatingsMatrix


@dataclass(frozen=True)
class FcmParams:
    cluster_count: int = 3
    fuzzifier: float = 2.0
    tolerance: float = 1e-4
    max_iterations: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.cluster_count < 1:
            raise ValueError("cluster_count must be >= 1")
        if not self.fuzzifier > 1:
            raise ValueError("fuzzifier must be > 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class MembershipMatrix:
    degrees: np.ndarray
    centroids: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def cluster_count(self) -> int:
        return self.degrees.shape[1]


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    cluster_count: int

    @property
    def members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == k) for k in range(self.cluster_count)]

    def members_of(self, u: int) -> np.ndarray:
        return np.flatnonzero(self.labels == self.labels[u])

    def sizes(self) -> list[int]:
        return np.bincount(self.labels, minlength=self.cluster_count).tolist()


def _sq_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # explicit row-wise reduction keeps results independent of row chunking
    out = np.empty((X.shape[0], centroids.shape[0]))
    for k, v in enumerate(centroids):
        out[:, k] = ((X - v) ** 2).sum(axis=1)
    return out


def _memberships(d2: np.ndarray, fuzzifier: float) -> np.ndarray:
    """Membership update from squared distances, one row per point."""
    n, c = d2.shape
    u = np.zeros((n, c))
    zero = d2 == 0.0
    has_zero = zero.any(axis=1)
    if has_zero.any():
        nearest = np.argmax(zero[has_zero], axis=1)
        u[np.flatnonzero(has_zero), nearest] = 1.0
    rest = ~has_zero
    if rest.any():
        # (d_k / d_j)^(2/(m-1)) == (d2_k / d2_j)^(1/(m-1))
        p = 1.0 / (fuzzifier - 1.0)
        d = d2[rest]
        ratio = (d[:, :, None] / d[:, None, :]) ** p
        u[rest] = 1.0 / ratio.sum(axis=2)
    return u


def _objective(u: np.ndarray, d2: np.ndarray, fuzzifier: float) -> float:
    return float(((u ** fuzzifier) * d2).sum())


def fcm_fit(train: RatingsMatrix | np.ndarray, params: FcmParams = FcmParams(),
            init: np.ndarray | None = None, threads: int = 1) -> MembershipMatrix:
    """Fit fuzzy C-means on user vectors (unrated items count as 0).

    Args:
        train: rating matrix, or a raw ``(n_points, n_features)`` array.
        params: cluster count, fuzzifier, stopping rule and seed.
        init: optional initial membership matrix; otherwise a seeded random
            row-stochastic matrix.
        threads: worker threads for the per-user distance/membership step.
            Results are bit-identical for any value.

    Returns:
        The final memberships, centroids and the objective after every
        iteration.
    """
    X = train.dense if isinstance(train, RatingsMatrix) else np.asarray(train, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    c = params.cluster_count
    if c > n:
        raise ValueError(f"cluster_count {c} exceeds number of users {n}")

    if init is None:
        u = np.random.default_rng(params.seed).random((n, c))
        u /= u.sum(axis=1, keepdims=True)
    else:
        u = np.array(init, dtype=np.float64)
        if u.shape != (n, c):
            raise ValueError(f"init shape {u.shape} != {(n, c)}")

    m = params.fuzzifier
    chunks = np.array_split(np.arange(n), max(1, min(threads, n)))
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def update(centroids):
        def work(rows):
            d2 = _sq_distances(X[rows], centroids)
            return d2, _memberships(d2, m)
        parts = list(pool.map(work, chunks)) if pool else [work(r) for r in chunks]
        return (np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]))

    result = MembershipMatrix(degrees=u, centroids=np.zeros((c, X.shape[1])))
    try:
        for it in range(1, params.max_iterations + 1):
            w = u ** m
            # fixed-order sum over users, no BLAS
            centroids = result.centroids.copy()
            for k in range(c):
                total = w[:, k].sum()
                if total > 0:  # a cluster emptied by the zero-distance rule keeps its centroid
                    centroids[k] = (w[:, k:k + 1] * X).sum(axis=0) / total
            d2, u_new = update(centroids)
            result.objective_trace.append(_objective(u_new, d2, m))
            delta = float(np.abs(u_new - u).max())
            u = u_new
            result.iterations = it
            result.centroids = centroids
            if delta < params.tolerance:
                result.converged = True
                break
    finally:
        if pool:
            pool.shutdown()
    result.degrees = u
    return result


def defuzzify_cog(row) -> int:
    """Cluster whose index is nearest the membership-weighted index centroid.

    Exact half-way ties go to the lower index.
    """
    row = np.asarray(row, dtype=np.float64)
    g = float(np.dot(np.arange(len(row)), row))
    k = math.ceil(g - 0.5)
    return int(min(max(k, 0), len(row) - 1))


def defuzzify_max(row) -> int:
    return int(np.argmax(np.asarray(row)))


DEFUZZIFIERS = {"cog": defuzzify_cog, "max": defuzzify_max}


def assign_clusters(membership: MembershipMatrix | np.ndarray, strategy: str = "cog") -> ClusterAssignment:
    degrees = membership.degrees if isinstance(membership, MembershipMatrix) else np.asarray(membership)
    try:
        fn = DEFUZZIFIERS[strategy]
    except KeyError:
        raise ValueError(f"unknown defuzzifier {strategy!r}; choose from {sorted(DEFUZZIFIERS)}") from None
    labels = np.array([fn(row) for row in degrees], dtype=np.int64)
    return ClusterAssignment(labels=labels, cluster_count=degrees.shape[1])
