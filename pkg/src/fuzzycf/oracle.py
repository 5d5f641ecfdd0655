"""Brute-force reference implementations for small instances.

Plain Python over ``{user: {item: rating}}`` dictionaries and the ``math``
module only. Nothing here is shared with the vectorised code paths, so the
two can check each other.
"""

from __future__ import annotations

import math
import random


def _sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def _mean(xs):
    return sum(xs) / len(xs)


class BruteForce:
    def __init__(self, ratings: dict[int, dict[int, int]], n_users: int,
                 r_med: float = 3.0, gamma: int = 50, midpoint: float = 3.0):
        self.R = ratings
        self.n_users = n_users
        self.r_med = r_med
        self.gamma = gamma
        self.midpoint = midpoint

    def rated(self, u):
        return self.R.get(u, {})

    def user_mean(self, u):
        r = self.rated(u)
        return _mean(list(r.values())) if r else self.midpoint

    def user_std(self, u):
        r = self.rated(u)
        if not r:
            return 0.0
        mu = self.user_mean(u)
        return math.sqrt(sum((x - mu) ** 2 for x in r.values()) / len(r))

    def item_mean(self, p):
        vals = [r[p] for r in self.R.values() if p in r]
        return _mean(vals) if vals else self.midpoint

    def item_raters(self, p):
        return sum(1 for r in self.R.values() if p in r)

    def common(self, u, v):
        return sorted(set(self.rated(u)) & set(self.rated(v)))

    def nhsm(self, u, v):
        ru, rv = self.rated(u), self.rated(v)
        common = self.common(u, v)
        pss = 0.0
        for p in common:
            a, b = ru[p], rv[p]
            prox = 1 - 1 / (1 + math.exp(-abs(a - b)))
            sign = 1 / (1 + math.exp(-abs(a - self.r_med) * abs(b - self.r_med)))
            sing = 1 - 1 / (1 + math.exp(-abs((a + b) / 2 - self.item_mean(p))))
            pss += prox * sign * sing
        jac = len(common) / (len(ru) * len(rv)) if ru and rv else 0.0
        x = abs(self.user_mean(u) - self.user_mean(v)) * abs(self.user_std(u) - self.user_std(v))
        urp = 1 - 1 / (1 + math.exp(-x))
        return pss * jac * urp

    def pearson(self, u, v):
        common = self.common(u, v)
        if len(common) < 2:
            return 0.0
        xs = [self.R[u][p] for p in common]
        ys = [self.R[v][p] for p in common]
        mx, my = _mean(xs), _mean(ys)
        sxx = sum((x - mx) ** 2 for x in xs)
        syy = sum((y - my) ** 2 for y in ys)
        if sxx == 0 or syy == 0:
            return 0.0
        return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / math.sqrt(sxx * syy)

    def cosine(self, u, v):
        common = self.common(u, v)
        if not common:
            return 0.0
        xs = [self.R[u][p] for p in common]
        ys = [self.R[v][p] for p in common]
        return sum(x * y for x, y in zip(xs, ys)) / math.sqrt(sum(x * x for x in xs) * sum(y * y for y in ys))

    def herlocker(self, u, v):
        return self.pearson(u, v) * min(len(self.common(u, v)), self.gamma) / self.gamma

    def mclaughlin(self, u, v):
        n = len(self.common(u, v))
        return self.pearson(u, v) * n / max(n, self.gamma) if n else 0.0

    def ra(self, u, v):
        return sum(1 / self.item_raters(p) for p in self.common(u, v))

    def similarity(self, name, u, v):
        return {"nhsm": self.nhsm, "pearson": self.pearson, "cosine": self.cosine,
                "herlocker_weighted": self.herlocker, "mclaughlin_weighted": self.mclaughlin,
                "ra": self.ra}[name](u, v)

    def neighbors(self, name, u, members, k):
        scored = [(self.similarity(name, u, v), v) for v in members if v != u]
        scored.sort(key=lambda t: (-t[0], t[1]))
        return [(v, s) for s, v in scored[:k]]

    def predict(self, u, i, neighbors, lo=1, hi=5):
        if not self.rated(u):
            all_r = [x for r in self.R.values() for x in r.values()]
            return _mean(all_r) if all_r else self.midpoint
        num = den = 0.0
        for v, s in neighbors:
            if i in self.rated(v):
                num += (self.R[v][i] - self.user_mean(v)) * s
                den += abs(s)
        if den == 0:
            return self.user_mean(u)
        return min(max(self.user_mean(u) + num / den, lo), hi)

    def top_n(self, u, candidates, neighbors, n):
        scored = [(self.predict(u, i, neighbors), i) for i in candidates]
        scored.sort(key=lambda t: (-t[0], t[1]))
        return [i for _, i in scored[:n]], {i: s for s, i in scored}


def fcm_reference(points, c, m, init, iterations):
    """Plain fuzzy C-means loop on lists of coordinate tuples."""
    U = [list(row) for row in init]
    trace = []
    dim = len(points[0])
    for _ in range(iterations):
        V = []
        for k in range(c):
            w = [U[j][k] ** m for j in range(len(points))]
            V.append([sum(w[j] * points[j][d] for j in range(len(points))) / sum(w)
                      for d in range(dim)])
        D = [[math.sqrt(sum((p[d] - V[k][d]) ** 2 for d in range(dim))) for k in range(c)]
             for p in points]
        newU = []
        for j in range(len(points)):
            if any(x == 0 for x in D[j]):
                z = D[j].index(0.0)
                newU.append([1.0 if k == z else 0.0 for k in range(c)])
                continue
            newU.append([1 / sum((D[j][k] / D[j][l]) ** (2 / (m - 1)) for l in range(c))
                         for k in range(c)])
        U = newU
        trace.append(sum(U[j][k] ** m * D[j][k] ** 2 for j in range(len(points)) for k in range(c)))
    return U, V, trace


def random_ratings(rng: random.Random, max_users=8, max_items=10, density=0.6, scale=(1, 5)):
    """A random small rating dictionary; every user and item index in range."""
    n_users = rng.randint(2, max_users)
    n_items = rng.randint(2, max_items)
    R = {}
    for u in range(n_users):
        row = {i: rng.randint(*scale) for i in range(n_items) if rng.random() < density}
        if row:
            R[u] = row
    return R, n_users, n_items
