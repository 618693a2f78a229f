"""Travel-tweet classifiers, metrics and evaluation protocols."""

from .evaluation import (CvResult, LogoResult, LogoSplit, fold_assignment, k_fold_cv,
                         leave_one_group_out, plan_logo_splits)
from .forest import ForestConfig, RandomForest, best_split, load_forest, save_forest, train_forest
from .linear import LinearConfig, LinearModel, load_linear, save_linear, train_linear
from .metrics import ConfusionCounts, EvalReport, MeanReport, Metrics, metrics, roc_auc
from .terms import TRAVEL_TERMS, match_modes, travel_term_search

__all__ = [
    "CvResult", "LogoResult", "LogoSplit", "fold_assignment", "k_fold_cv", "leave_one_group_out",
    "plan_logo_splits", "ForestConfig", "RandomForest", "best_split", "load_forest", "save_forest",
    "train_forest", "LinearConfig", "LinearModel", "load_linear", "save_linear", "train_linear",
    "ConfusionCounts", "EvalReport", "MeanReport", "Metrics", "metrics", "roc_auc",
    "TRAVEL_TERMS", "match_modes", "travel_term_search",
]
