"""63-column per-trial feature matrix (algorithm x validity index)."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .clustering.base import ALGORITHMS, Algorithm
from .indices import INDEX_NAMES, IndexVector

COLUMN_PAIRS = tuple((a.value, i) for a in ALGORITHMS for i in INDEX_NAMES)
COLUMNS = tuple(f"{a}_{i}" for a, i in COLUMN_PAIRS)


@dataclass
class FeatureMatrix:
    """Rows are trials; NaN marks a MISSING index value."""

    values: np.ndarray
    labels: np.ndarray
    keys: list[tuple[str, str]]
    columns: tuple[str, ...] = COLUMNS

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(len(self.keys), len(self.columns))
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.labels) != len(self.keys):
            raise ValueError("labels and keys differ in length")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be binary")

    @property
    def column_pairs(self):
        return [tuple(c.split("_", 1)) for c in self.columns]

    @property
    def n_rows(self) -> int:
        return len(self.keys)

    def sorted(self) -> "FeatureMatrix":
        order = sorted(range(self.n_rows), key=lambda i: self.keys[i])
        return FeatureMatrix(self.values[order], self.labels[order], [self.keys[i] for i in order], self.columns)

    def subset(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows)
        return FeatureMatrix(self.values[rows], self.labels[rows], [self.keys[i] for i in rows], self.columns)


def build_feature_matrix(
    trials: Sequence,
    selection_results: Mapping,
    index_vectors: Mapping,
) -> FeatureMatrix:
    """Both mappings are keyed by ((subject_id, stimulus_id), Algorithm)."""
    rows, labels, keys = [], [], []
    for tr in trials:
        row = []
        for algo in ALGORITHMS:
            pair = (tr.key, algo)
            if pair not in selection_results or pair not in index_vectors:
                raise KeyError(f"no result for trial {tr.key} / {algo.value}")
            vec: IndexVector = index_vectors[pair]
            row.extend(np.nan if v is None else float(v) for v in vec.as_tuple())
        rows.append(row)
        labels.append(tr.group.label)
        keys.append(tr.key)
    values = np.array(rows, dtype=float).reshape(len(rows), len(COLUMNS))
    return FeatureMatrix(values, np.array(labels, dtype=int), keys)


def save_feature_matrix(matrix: FeatureMatrix, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject_id", "stimulus_id", "label", *matrix.columns])
        for (subject, stimulus), label, row in zip(matrix.keys, matrix.labels, matrix.values):
            w.writerow([subject, stimulus, int(label), *("" if np.isnan(v) else repr(float(v)) for v in row)])


def load_feature_matrix(path) -> FeatureMatrix:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["subject_id", "stimulus_id", "label"]:
            raise ValueError("feature CSV must start with subject_id,stimulus_id,label")
        columns = tuple(header[3:])
        keys, labels, rows = [], [], []
        for rec in reader:
            keys.append((rec[0], rec[1]))
            labels.append(int(rec[2]))
            rows.append([np.nan if v == "" else float(v) for v in rec[3:]])
    values = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return FeatureMatrix(values, np.array(labels, dtype=int), keys, columns)


@dataclass
class Standardizer:
    """Median imputation then z-scoring, with parameters from training rows only."""

    scale: bool = True
    median: np.ndarray | None = field(default=None, repr=False)
    mean: np.ndarray | None = field(default=None, repr=False)
    std: np.ndarray | None = field(default=None, repr=False)

    def fit(self, X) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        med = np.zeros(X.shape[1])
        for j in range(X.shape[1]):
            col = X[:, j]
            col = col[~np.isnan(col)]
            if col.size:
                med[j] = np.median(col)
        self.median = med
        filled = self._impute(X)
        self.mean = filled.mean(axis=0)
        std = filled.std(axis=0)
        self.std = np.where(std > 0, std, 1.0)
        return self

    def _impute(self, X):
        return np.where(np.isnan(X), self.median[None, :], X)

    def transform(self, X) -> np.ndarray:
        if self.median is None:
            raise RuntimeError("Standardizer is not fitted")
        filled = self._impute(np.asarray(X, dtype=float))
        if not self.scale:
            return filled
        return (filled - self.mean) / self.std

    def fit_transform(self, X) -> np.ndarray:
        return self.fit(X).transform(X)


def algorithm_columns(algorithm) -> list[int]:
    algo = Algorithm(algorithm).value
    return [j for j, (a, _) in enumerate(COLUMN_PAIRS) if a == algo]
