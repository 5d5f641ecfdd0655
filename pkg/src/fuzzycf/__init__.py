"""Hybrid collaborative filtering: fuzzy C-means user clusters + NHSM k-NN."""

from .clustering import ClusterAssignment, FcmParams, MembershipMatrix, assign_clusters, fcm_fit
from .dataset import RatingScale, RatingsMatrix, parse_movielens, split_folds
from .engine import Recommender
from .evaluation import ExperimentConfig, EvaluationReport, run_experiment
from .similarity import MEASURES, SimilarityContext

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment", "EvaluationReport", "ExperimentConfig", "FcmParams", "MEASURES",
    "MembershipMatrix", "RatingScale", "RatingsMatrix", "Recommender", "SimilarityContext",
    "assign_clusters", "fcm_fit", "parse_movielens", "run_experiment", "split_folds",
]
