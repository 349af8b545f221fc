"""Model roster, stratified cross-validation and Markdown/JSON reports."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from ..features import FeatureMatrix, Standardizer
from ._base import Model, ModelError
from .linear import KNN, SVM, LogisticRegression
from .metrics import compute_metrics
from .mlp import MLP
from .trees import DecisionTree, GradBoost, RandomForest


class Family(str, Enum):
    LR = "LR"
    SVM = "SVM"
    KNN = "KNN"
    DecisionTree = "DecisionTree"
    RandomForest = "RandomForest"
    GradBoost = "GradBoost"
    MLP = "MLP"


FAMILIES = tuple(Family)
DISPLAY_NAMES = {
    Family.LR: "LR",
    Family.SVM: "SVM",
    Family.KNN: "KNN",
    Family.DecisionTree: "Decision Tree",
    Family.RandomForest: "Random Forest",
    Family.GradBoost: "GradBoost",
    Family.MLP: "MLP",
}
_CLASSES = {
    Family.LR: LogisticRegression,
    Family.SVM: SVM,
    Family.KNN: KNN,
    Family.DecisionTree: DecisionTree,
    Family.RandomForest: RandomForest,
    Family.GradBoost: GradBoost,
    Family.MLP: MLP,
}
# margin, distance and gradient based models get z-scored inputs; trees see raw imputed values
SCALED = frozenset({Family.LR, Family.SVM, Family.KNN, Family.MLP})
METRICS = ("accuracy", "precision", "recall", "f1", "auc")


@dataclass
class ModelSpec:
    family: Family
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.family = Family(self.family)
        if self.family is Family.MLP and tuple(self.params.get("hidden", (128, 32))) != (128, 32):
            raise ValueError("MLP hidden layers are fixed at (128, 32)")

    def build(self, seed: int | None = None) -> Model:
        return _CLASSES[self.family](**self.params, seed=self.seed if seed is None else seed)


def train(spec: ModelSpec, X, y, seed: int | None = None) -> Model:
    return spec.build(seed).fit(X, y)


def predict_score(model: Model, X) -> np.ndarray:
    return model.decision(X)


@dataclass
class ModelReport:
    family: Family
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    inference_time_per_sample: float
    folds: list[dict] = field(default_factory=list)

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        if not timing:
            d.pop("inference_time_per_sample")
            for f in d["folds"]:
                f.pop("inference_time_per_sample", None)
        return d


def stratified_folds(labels, n_folds: int, seed: int) -> list[np.ndarray]:
    """Shuffle each class with ``seed`` and deal its rows round-robin into folds."""
    y = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(n_folds)]
    offset = 0
    for cls in (0, 1):
        rows = rng.permutation(np.flatnonzero(y == cls))
        for i, r in enumerate(rows):
            folds[(i + offset) % n_folds].append(int(r))
        offset += len(rows)
    return [np.sort(np.array(f, dtype=int)) for f in folds]


def fit_fold(spec: ModelSpec, X_train, y_train, seed: int):
    """Preprocessing and model fitted on training rows only."""
    std = Standardizer(scale=spec.family in SCALED).fit(X_train)
    model = train(spec, std.transform(X_train), y_train, seed=seed)
    return std, model


def cross_validate(
    spec: ModelSpec,
    matrix: FeatureMatrix,
    n_folds: int = 5,
    n_runs: int = 5,
    on_fold: Callable | None = None,
) -> ModelReport:
    """``n_runs`` stratified ``n_folds``-fold splits (run r shuffles with seed r).

    Metrics are averaged over all run x fold evaluations.  ``on_fold`` is
    called as on_fold(run, fold, train_rows, test_rows, standardizer, model).
    """
    X, y = matrix.values, matrix.labels
    for cls in (0, 1):
        if np.count_nonzero(y == cls) < n_folds:
            raise ModelError(f"need at least {n_folds} rows of class {cls}")
    evals = []
    for run in range(n_runs):
        folds = stratified_folds(y, n_folds, seed=run)
        for f, test in enumerate(folds):
            train_rows = np.setdiff1d(np.arange(len(y)), test)
            seed = int(np.random.SeedSequence([spec.seed, run, f]).generate_state(1)[0])
            std, model = fit_fold(spec, X[train_rows], y[train_rows], seed)
            Xt = std.transform(X[test])
            t0 = time.perf_counter()
            scores = predict_score(model, Xt)
            elapsed = time.perf_counter() - t0
            pred = (scores >= model.threshold).astype(int)
            m = compute_metrics(pred, scores, y[test])
            m.update(run=run, fold=f, inference_time_per_sample=elapsed / len(test))
            evals.append(m)
            if on_fold is not None:
                on_fold(run, f, train_rows, test, std, model)
    mean = {k: float(np.mean([e[k] for e in evals])) for k in METRICS}
    timing = float(np.mean([e["inference_time_per_sample"] for e in evals]))
    return ModelReport(spec.family, **mean, inference_time_per_sample=timing, folds=evals)


def timing_bucket(seconds: float) -> str:
    for limit in (0.0001, 0.001, 0.01, 0.1):
        if seconds < limit:
            return f"<{limit:g}s"
    return ">=0.1s"


def reports_markdown(reports, dataset: str = "synthetic", header: str = "") -> str:
    best = max(reports, key=lambda r: r.auc).family if reports else None
    lines = [header, ""] if header else []
    lines.append("| Dataset | Model | Accuracy | Precision | Recall | F1-score | AUC | Inference Time |")
    lines.append("|---|---|---|---|---|---|---|---|")
    for r in reports:
        name = DISPLAY_NAMES[r.family] + (" (best AUC)" if r.family is best else "")
        cells = [f"{getattr(r, k):.3f}" for k in METRICS]
        lines.append(f"| {dataset} | {name} | " + " | ".join(cells) + f" | {timing_bucket(r.inference_time_per_sample)} |")
    return "\n".join(lines) + "\n"


def reports_json(reports, timing: bool = True, **extra) -> str:
    doc = dict(extra)
    doc["models"] = [r.to_dict(timing=timing) for r in reports]
    return json.dumps(doc, indent=2, sort_keys=True)
