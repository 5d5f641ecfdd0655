"""Cross-validated MAE / Accuracy / Precision / Recall experiments."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .clustering import FcmParams, assign_clusters, fcm_fit
from .dataset import Fold, RatingsMatrix, split_folds
from .engine import Recommender, rank_items
from .similarity import MEASURES, PSS_AGGREGATIONS, SINGULARITY_FORMS, SimilarityContext

log = logging.getLogger(__name__)

METRICS = ("Accuracy", "Precision", "Recall", "MAE")


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    cluster_count: int = 3
    fuzzifier: float = 2.0
    tolerance: float = 1e-4
    max_iterations: int = 300
    neighbor_count: int = 50
    top_n_list: tuple[int, ...] = (5, 10, 15, 20, 30)
    relevance_threshold: float = 4
    folds: int = 5
    seed: int = 0
    measures: tuple[str, ...] = ("nhsm",)
    defuzzifier: str = "cog"
    pss_aggregation: str = "sum"
    singularity_form: str = "absolute"
    weighting_gamma: int = 50
    threads: int = 1

    def __post_init__(self):
        tops = tuple(int(n) for n in self.top_n_list)
        object.__setattr__(self, "top_n_list", tops)
        object.__setattr__(self, "measures", tuple(self.measures))
        if not tops or list(tops) != sorted(set(tops)) or tops[0] < 1:
            raise ValueError(f"top_n_list must be nonempty, ascending, positive: {tops}")
        if not self.measures:
            raise ValueError("at least one measure is required")
        for m in self.measures:
            if m not in MEASURES:
                raise ValueError(f"unknown similarity measure {m!r}; valid: {', '.join(MEASURES)}")
        if self.defuzzifier not in ("cog", "max"):
            raise ValueError(f"defuzzifier must be 'cog' or 'max', got {self.defuzzifier!r}")
        if self.pss_aggregation not in PSS_AGGREGATIONS:
            raise ValueError(f"pss_aggregation must be one of {PSS_AGGREGATIONS}")
        if self.singularity_form not in SINGULARITY_FORMS:
            raise ValueError(f"singularity_form must be one of {SINGULARITY_FORMS}")
        if self.neighbor_count < 1 or self.folds < 2 or self.threads < 1:
            raise ValueError("neighbor_count >= 1, folds >= 2 and threads >= 1 are required")

    def fcm_params(self) -> FcmParams:
        return FcmParams(self.cluster_count, self.fuzzifier, self.tolerance,
                         self.max_iterations, self.seed)


@dataclass
class ConfusionCounts:
    """Table of (actual relevance) x (recommended) decisions.

    A = irrelevant & not recommended, B = irrelevant & recommended,
    C = relevant & not recommended, D = relevant & recommended.
    """
    A: int = 0
    B: int = 0
    C: int = 0
    D: int = 0

    @property
    def total(self) -> int:
        return self.A + self.B + self.C + self.D

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        return ConfusionCounts(self.A + other.A, self.B + other.B,
                               self.C + other.C, self.D + other.D)


def _percent(num: int, den: int) -> float | None:
    return None if den == 0 else 100.0 * num / den


def confusion_metrics(counts: ConfusionCounts) -> tuple[float | None, float | None, float | None]:
    """(accuracy, precision, recall) as percentages; ``None`` when undefined."""
    a, b, c, d = counts.A, counts.B, counts.C, counts.D
    return (_percent(a + d, a + b + c + d), _percent(d, b + d), _percent(d, c + d))


def mae(predictions) -> float:
    pairs = list(predictions)
    if not pairs:
        raise UndefinedMetricError("MAE of an empty prediction list is undefined")
    return sum(abs(p - a) for p, a in pairs) / len(pairs)


def classify(ranked_items, test_items, test_ratings, n: int, threshold: float) -> ConfusionCounts:
    """Confusion counts for one user: the first ``n`` of ``ranked_items`` are recommended."""
    recommended = set(list(ranked_items)[:n])
    out = ConfusionCounts()
    for item, rating in zip(test_items, test_ratings):
        relevant = rating >= threshold
        if item in recommended:
            if relevant:
                out.D += 1
            else:
                out.B += 1
        elif relevant:
            out.C += 1
        else:
            out.A += 1
    return out


@dataclass
class FoldScore:
    mae: float
    n_predictions: int
    counts: dict[int, ConfusionCounts]
    fallbacks: dict[str, int] = field(default_factory=dict)


def fit_clusters(train: RatingsMatrix, config: ExperimentConfig):
    membership = fcm_fit(train, config.fcm_params(), threads=config.threads)
    return membership, assign_clusters(membership, config.defuzzifier)


def score_fold(train: RatingsMatrix, test: Fold | tuple, config: ExperimentConfig,
               measure: str, assignment=None, context: SimilarityContext | None = None) -> FoldScore:
    """Predict every held-out rating of each test user and build Top-N counts.

    ``test`` is a :class:`Fold` or a ``(users, items, ratings)`` triple.
    Clustering is fitted on ``train`` unless ``assignment`` is given.
    """
    if isinstance(test, Fold):
        t_users, t_items, t_ratings = test.test_users, test.test_items, test.test_ratings
    else:
        t_users, t_items, t_ratings = (np.asarray(x) for x in test)
    if assignment is None:
        _, assignment = fit_clusters(train, config)
    if context is None:
        context = SimilarityContext(train, singularity_form=config.singularity_form,
                                    pss_aggregation=config.pss_aggregation,
                                    gamma=config.weighting_gamma)
    engine = Recommender(train, assignment, measure, config.neighbor_count, context)

    counts = {n: ConfusionCounts() for n in config.top_n_list}
    fallbacks = {"neighbors": 0, "user_mean": 0, "global_mean": 0}
    abs_err_total = 0.0
    n_pred = 0
    order = np.argsort(t_users, kind="stable")
    users, starts = np.unique(t_users[order], return_index=True)
    bounds = list(starts[1:]) + [len(order)]
    for u, lo, hi in zip(users.tolist(), starts.tolist(), bounds):
        sel = order[lo:hi]
        items, actual = t_items[sel], t_ratings[sel]
        scores, codes = engine.predict_many(u, items)
        abs_err_total += float(np.abs(scores - actual).sum())
        n_pred += len(items)
        for code, key in enumerate(("neighbors", "user_mean", "global_mean")):
            fallbacks[key] += int((codes == code).sum())
        ranked = rank_items(items, scores, len(items)).tolist()
        for n in config.top_n_list:
            counts[n] += classify(ranked, items.tolist(), actual.tolist(), n,
                                  config.relevance_threshold)
    if n_pred == 0:
        raise UndefinedMetricError("test fold has no ratings to score")
    skipped = int((np.bincount(t_users, minlength=train.n_users) == 0).sum())
    if skipped:
        log.info("%s: %d users have no test items in this fold", measure, skipped)
    return FoldScore(abs_err_total / n_pred, n_pred, counts, fallbacks)


@dataclass
class CellResult:
    mae: float
    counts: ConfusionCounts

    @property
    def metrics(self) -> dict[str, float | None]:
        acc, prec, rec = confusion_metrics(self.counts)
        return {"Accuracy": acc, "Precision": prec, "Recall": rec, "MAE": self.mae}


def _mean(values):
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


@dataclass
class EvaluationReport:
    config: ExperimentConfig
    # (measure, fold, N) -> cell
    cells: dict[tuple[str, int, int], CellResult]
    cluster_sizes: list[list[int]]
    fallbacks: dict[tuple[str, int], dict[str, int]]
    n_users: int = 0
    n_items: int = 0
    n_entries: int = 0

    def fold_value(self, measure: str, fold: int, n: int, metric: str):
        return self.cells[(measure, fold, n)].metrics[metric]

    def mean_value(self, measure: str, n: int, metric: str):
        """Cross-fold mean for one Top-N size (Table-2 cell)."""
        return _mean(self.fold_value(measure, f, n, metric) for f in range(self.config.folds))

    def averaged_value(self, measure: str, metric: str):
        """Mean over Top-N sizes of the cross-fold means (Table-3 cell)."""
        return _mean(self.mean_value(measure, n, metric) for n in self.config.top_n_list)

    def directional_check(self) -> dict | None:
        if not {"nhsm", "pearson"} <= set(self.config.measures):
            return None
        a = self.averaged_value("nhsm", "MAE")
        b = self.averaged_value("pearson", "MAE")
        return {"nhsm_mae": a, "pearson_mae": b, "nhsm_not_worse": a <= b}

    def decisions(self) -> dict[str, str]:
        c = self.config
        return {
            "relevance": f"actual rating >= {c.relevance_threshold}",
            "topn_candidates": "each user's own test-fold items",
            "mae_scope": "all test-fold predictions (same value for every N)",
            "fcm": f"c={c.cluster_count} fuzzifier={c.fuzzifier} tol={c.tolerance} "
                   f"max_iter={c.max_iterations} unrated=0 init=seeded-random",
            "defuzzifier": c.defuzzifier,
            "singularity_form": c.singularity_form,
            "pss_aggregation": c.pss_aggregation,
            "prediction": "clamped to scale; fallback user mean then global mean",
            "folds": f"{c.folds}-fold random split of rating entries, seed {c.seed}",
        }

    # output

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        tops = self.config.top_n_list
        for key, value in self.decisions().items():
            buf.write(f"# {key}: {value}\n")
        w.writerow(["method", "metric"] + [f"top{n}" for n in tops])
        for m in self.config.measures:
            for metric in METRICS:
                w.writerow([m, metric] + [_fmt(self.mean_value(m, n, metric), metric) for n in tops])
        buf.write("\n")
        w.writerow(["method", "metric", "mean_over_top_n"])
        for m in self.config.measures:
            for metric in METRICS:
                w.writerow([m, metric, _fmt(self.averaged_value(m, metric), metric)])
        check = self.directional_check()
        if check is not None and not check["nhsm_not_worse"]:
            buf.write(f"# WARNING: nhsm mean MAE {check['nhsm_mae']:.4f} exceeds "
                      f"pearson mean MAE {check['pearson_mae']:.4f}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        c = self.config
        per_fold = []
        for (m, f, n), cell in sorted(self.cells.items()):
            per_fold.append({"measure": m, "fold": f, "top_n": n, **asdict(cell.counts),
                             **cell.metrics})
        return {
            "config": {**asdict(c), "top_n_list": list(c.top_n_list), "measures": list(c.measures)},
            "dataset": {"n_users": self.n_users, "n_items": self.n_items,
                        "n_entries": self.n_entries},
            "decisions": self.decisions(),
            "cluster_sizes": self.cluster_sizes,
            "fallbacks": [{"measure": m, "fold": f, **v}
                          for (m, f), v in sorted(self.fallbacks.items())],
            "cells": per_fold,
            "means": {m: {str(n): {k: self.mean_value(m, n, k) for k in METRICS}
                          for n in c.top_n_list} for m in c.measures},
            "averages": {m: {k: self.averaged_value(m, k) for k in METRICS}
                         for m in c.measures},
            "directional_check": self.directional_check(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _fmt(value, metric: str) -> str:
    if value is None:
        return "NA"
    return f"{value:.4f}"


def run_experiment(matrix: RatingsMatrix, config: ExperimentConfig = ExperimentConfig()) -> EvaluationReport:
    """Every configured measure on every fold; clustering is shared per fold."""
    split = split_folds(matrix, config.folds, config.seed)
    cells: dict[tuple[str, int, int], CellResult] = {}
    fallbacks = {}
    sizes = []
    for f, fold in enumerate(split):
        _, assignment = fit_clusters(fold.train, config)
        sizes.append(assignment.sizes())
        log.info("fold %d: train=%d test=%d cluster sizes %s", f, fold.train.n_entries,
                 fold.test_size, sizes[-1])
        context = SimilarityContext(fold.train, singularity_form=config.singularity_form,
                                    pss_aggregation=config.pss_aggregation,
                                    gamma=config.weighting_gamma)
        for m in config.measures:
            score = score_fold(fold.train, fold, config, m, assignment, context)
            fallbacks[(m, f)] = score.fallbacks
            for n, counts in score.counts.items():
                cells[(m, f, n)] = CellResult(score.mae, counts)
            log.info("fold %d %s: MAE %.4f", f, m, score.mae)
    return EvaluationReport(config, cells, sizes, fallbacks,
                            matrix.n_users, matrix.n_items, matrix.n_entries)
