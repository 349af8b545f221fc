from ._base import Model, ModelError, sigmoid
from .evaluation import (
    FAMILIES,
    SCALED,
    Family,
    ModelReport,
    ModelSpec,
    cross_validate,
    fit_fold,
    predict_score,
    reports_json,
    reports_markdown,
    stratified_folds,
    timing_bucket,
    train,
)
from .linear import KNN, SVM, LogisticRegression
from .metrics import compute_metrics, confusion, roc_auc
from .mlp import MLP
from .trees import DecisionTree, GradBoost, RandomForest

__all__ = [
    "FAMILIES",
    "KNN",
    "MLP",
    "SCALED",
    "SVM",
    "DecisionTree",
    "Family",
    "GradBoost",
    "LogisticRegression",
    "Model",
    "ModelError",
    "ModelReport",
    "ModelSpec",
    "RandomForest",
    "compute_metrics",
    "confusion",
    "cross_validate",
    "fit_fold",
    "predict_score",
    "reports_json",
    "reports_markdown",
    "roc_auc",
    "sigmoid",
    "stratified_folds",
    "timing_bucket",
    "train",
]
