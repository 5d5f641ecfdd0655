"""Small-instance equivalence suite: vectorised engine vs. brute-force oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterAssignment
from .dataset import RatingsMatrix
from .engine import Recommender, predict, select_neighbors
from .oracle import BruteForce, random_ratings
from .similarity import MEASURES, SimilarityContext

TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    comparisons: int = 0
    failures: list[str] = field(default_factory=list)
    max_error: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def close(self, got, want, what):
        self.comparisons += 1
        err = abs(got - want)
        self.max_error = max(self.max_error, err)
        if not err <= TOL:
            self.failures.append(f"{what}: got {got!r}, want {want!r}")

    def equal(self, got, want, what):
        self.comparisons += 1
        if got != want:
            self.failures.append(f"{what}: got {got!r}, want {want!r}")


def matrix_from_dict(R: dict[int, dict[int, int]], n_users: int, n_items: int) -> RatingsMatrix:
    triples = [(u, i, r) for u, row in sorted(R.items()) for i, r in sorted(row.items())]
    users, items, ratings = (list(t) for t in zip(*triples)) if triples else ([], [], [])
    return RatingsMatrix(users, items, ratings, np.arange(n_users), np.arange(n_items))


def run_oracle_suite(trials: int = 100, seed: int = 0, k: int = 3) -> list[CheckResult]:
    rng = random.Random(seed)
    results = {name: CheckResult(name) for name in
               [f"similarity:{m}" for m in MEASURES] + ["neighbors", "prediction", "top_n"]}
    for t in range(trials):
        R, n_users, n_items = random_ratings(rng)
        train = matrix_from_dict(R, n_users, n_items)
        ctx = SimilarityContext(train, gamma=3)
        bf = BruteForce(R, n_users, gamma=3)
        labels = np.array([rng.randrange(2) for _ in range(n_users)])
        assignment = ClusterAssignment(labels, 2)
        for name, measure in MEASURES.items():
            res = results[f"similarity:{name}"]
            S = measure.matrix(ctx)
            for u in range(n_users):
                for v in range(n_users):
                    want = bf.similarity(name, u, v)
                    res.close(S[u, v], want, f"trial {t} matrix {name}({u},{v})")
                    res.close(measure.pair(u, v, ctx), want, f"trial {t} pair {name}({u},{v})")

        engine = Recommender(train, assignment, "nhsm", k, ctx)
        for u in range(n_users):
            members = np.flatnonzero(labels == labels[u]).tolist()
            want_nb = bf.neighbors("nhsm", u, members, k)
            nl = select_neighbors(u, assignment, engine.similarities, k)
            results["neighbors"].equal(nl.indices.tolist(), [v for v, _ in want_nb],
                                       f"trial {t} neighbors of {u}")
            for i in range(n_items):
                p = predict(u, i, nl, train, engine.profiles)
                results["prediction"].close(p.rating, bf.predict(u, i, want_nb),
                                            f"trial {t} predict({u},{i})")
            candidates = [i for i in range(n_items) if i not in bf.rated(u)]
            want_top, _ = bf.top_n(u, candidates, want_nb, 4)
            if len(nl) > 0:
                got_top = [i for i, _ in engine.recommend(u, 4, candidates)]
                results["top_n"].equal(got_top, want_top, f"trial {t} top-n of {u}")
    return list(results.values())
