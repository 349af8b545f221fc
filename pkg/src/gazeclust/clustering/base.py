from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy.spatial.distance import pdist, squareform

NOISE = -1


class Algorithm(str, Enum):
    KMEANS = "kmeans"
    KMEDOIDS = "kmedoids"
    AC = "ac"
    BIRCH = "birch"
    DBSCAN = "dbscan"
    OPTICS = "optics"
    GMM = "gmm"


# Order used for feature columns and report rows.
ALGORITHMS = tuple(Algorithm)
DENSITY_BASED = frozenset({Algorithm.DBSCAN, Algorithm.OPTICS})


class ClusteringError(ValueError):
    pass


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    algorithm: Algorithm
    params: dict[str, Any] = field(default_factory=dict)
    centroids: np.ndarray | None = None
    # per-iteration objective (WCSS, log-likelihood, merge heights); not serialised
    trace: list[float] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        self.algorithm = Algorithm(self.algorithm)

    @property
    def k(self) -> int:
        return int(np.unique(self.labels[self.labels != NOISE]).size)

    @property
    def n_noise(self) -> int:
        return int(np.count_nonzero(self.labels == NOISE))

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "params": _jsonable(self.params),
            "k": self.k,
            "labels": [int(v) for v in self.labels],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterAssignment":
        return cls(np.asarray(d["labels"], dtype=int), Algorithm(d["algorithm"]), dict(d.get("params", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(params: dict) -> dict:
    out = {}
    for key, value in params.items():
        if isinstance(value, np.generic):
            value = value.item()
        out[key] = value
    return out


def as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ClusteringError("points must be a 2-D array of shape (n, d)")
    return pts


def check_k(points: np.ndarray, k: int) -> None:
    if k < 2:
        raise ClusteringError(f"k must be >= 2, got {k}")
    if len(points) < k:
        raise ClusteringError(f"insufficient points: {len(points)} < k={k}")


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    return squareform(pdist(points))


def relabel_first_seen(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Renumber non-noise labels 0..k-1 in order of first appearance.

    Returns the new labels and ``order`` with ``order[new] = old``.
    """
    labels = np.asarray(labels, dtype=int)
    out = np.full_like(labels, NOISE)
    mask = labels != NOISE
    uniq, first, inverse = np.unique(labels[mask], return_index=True, return_inverse=True)
    by_first = np.argsort(first, kind="stable")
    rank = np.empty(len(uniq), dtype=int)
    rank[by_first] = np.arange(len(uniq))
    out[mask] = rank[inverse]
    return out, uniq[by_first]


def same_partition(a, b) -> bool:
    """True if two labelings agree up to renaming (noise must match noise)."""
    a, _ = relabel_first_seen(np.asarray(a))
    b, _ = relabel_first_seen(np.asarray(b))
    return bool(np.array_equal(a, b))
