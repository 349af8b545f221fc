"""Per-trial hyperparameter grid search, scored by silhouette."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .clustering import (
    Algorithm,
    ClusterAssignment,
    ClusteringError,
    agglomerative,
    birch,
    dbscan,
    gmm,
    kmeans,
    kmedoids,
    optics,
    optics_ordering,
    pairwise_distances,
)
from .clustering.base import NOISE
from .indices import silhouette

MAX_NOISE_FRACTION = 0.5
DEFAULT_K = tuple(range(2, 11))
DEFAULT_MIN_PTS = (4, 8, 12)
DEFAULT_XI = (0.02, 0.05, 0.1)
EPS_QUANTILES = tuple(q / 10 for q in range(1, 10))
THRESHOLD_QUANTILES = (0.25, 0.5, 0.75)

# fields each algorithm is searched over, in nesting order (outermost first)
GRID_FIELDS = {
    Algorithm.KMEANS: ("k",),
    Algorithm.KMEDOIDS: ("k",),
    Algorithm.AC: ("k",),
    Algorithm.GMM: ("k",),
    Algorithm.BIRCH: ("threshold", "k"),
    Algorithm.DBSCAN: ("eps", "min_pts"),
    Algorithm.OPTICS: ("min_pts", "xi"),
}


@dataclass
class GridSpec:
    algorithm: Algorithm
    k: list[int] = field(default_factory=list)
    eps: list[float] = field(default_factory=list)
    min_pts: list[int] = field(default_factory=list)
    xi: list[float] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    branching: int = 50
    seed: int = 0

    def __post_init__(self):
        self.algorithm = Algorithm(self.algorithm)
        if any(k < 2 for k in self.k):
            raise ValueError("every k must be >= 2")
        if any(e <= 0 for e in self.eps) or any(t <= 0 for t in self.threshold):
            raise ValueError("eps and threshold candidates must be > 0")
        if any(m < 2 for m in self.min_pts):
            raise ValueError("every min_pts must be >= 2")
        if any(not 0 < x < 1 for x in self.xi):
            raise ValueError("every xi must lie in (0, 1)")

    def candidates(self) -> list[dict]:
        names = GRID_FIELDS[self.algorithm]
        lists = [getattr(self, n) for n in names]
        return [dict(zip(names, combo)) for combo in itertools.product(*lists)]


@dataclass
class SelectionResult:
    best: ClusterAssignment | None
    best_sc: float | None
    n_candidates_evaluated: int
    degenerate: bool
    algorithm: Algorithm | None = None

    def to_dict(self) -> dict:
        algo = self.algorithm or (self.best.algorithm if self.best else None)
        return {
            "algorithm": algo.value if algo else None,
            "best": None if self.best is None else self.best.to_dict(),
            "best_sc": self.best_sc,
            "n_candidates_evaluated": self.n_candidates_evaluated,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionResult":
        best = None if d.get("best") is None else ClusterAssignment.from_dict(d["best"])
        algo = d.get("algorithm")
        return cls(
            best,
            d.get("best_sc"),
            int(d["n_candidates_evaluated"]),
            bool(d["degenerate"]),
            Algorithm(algo) if algo else None,
        )


def knn_distances(dist: np.ndarray, k: int = 4) -> np.ndarray:
    """Distance from each point to its k-th nearest other point."""
    k = min(k, len(dist) - 1)
    return np.partition(dist, k, axis=1)[:, k]


def _quantiles(values, qs):
    vals = np.quantile(values, qs)
    out = []
    for v in vals:
        v = float(v)
        if v > 0 and v not in out:
            out.append(v)
    return out


def default_grid(algorithm, points, dist=None, seed: int = 0) -> GridSpec:
    algorithm = Algorithm(algorithm)
    pts = np.asarray(points, dtype=float)
    if algorithm in (Algorithm.KMEANS, Algorithm.KMEDOIDS, Algorithm.AC, Algorithm.GMM):
        return GridSpec(algorithm, k=list(DEFAULT_K), seed=seed)
    if algorithm is Algorithm.OPTICS:
        return GridSpec(algorithm, min_pts=list(DEFAULT_MIN_PTS), xi=list(DEFAULT_XI), seed=seed)
    if dist is None:
        dist = pairwise_distances(pts)
    if algorithm is Algorithm.DBSCAN:
        eps = _quantiles(knn_distances(dist, 4), EPS_QUANTILES)
        return GridSpec(algorithm, eps=eps, min_pts=list(DEFAULT_MIN_PTS), seed=seed)
    # all pairs are used; trials are small enough that no subsampling is needed
    thresholds = _quantiles(pdist(pts), THRESHOLD_QUANTILES)
    return GridSpec(algorithm, threshold=thresholds, k=list(DEFAULT_K), seed=seed)


class _Runner:
    """Runs one candidate, reusing per-trial work shared across candidates."""

    def __init__(self, spec: GridSpec, points, dist):
        self.spec = spec
        self.points = points
        self.dist = dist
        self._reach = {}

    def __call__(self, params) -> ClusterAssignment:
        a, p, s = self.spec.algorithm, self.points, self.spec.seed
        if a is Algorithm.KMEANS:
            return kmeans(p, params["k"], seed=s)
        if a is Algorithm.KMEDOIDS:
            return kmedoids(p, params["k"], seed=s, dist=self.dist)
        if a is Algorithm.AC:
            return agglomerative(p, params["k"])
        if a is Algorithm.GMM:
            return gmm(p, params["k"], seed=s)
        if a is Algorithm.BIRCH:
            return birch(p, params["threshold"], self.spec.branching, params["k"])
        if a is Algorithm.DBSCAN:
            return dbscan(p, params["eps"], params["min_pts"], dist=self.dist)
        m = params["min_pts"]
        if m not in self._reach:
            self._reach[m] = optics_ordering(p, m, dist=self.dist)
        return optics(p, m, params["xi"], reach=self._reach[m])


def admissible(assignment: ClusterAssignment) -> bool:
    labels = assignment.labels
    if assignment.k < 2:
        return False
    return np.count_nonzero(labels == NOISE) <= MAX_NOISE_FRACTION * len(labels)


def score(points, assignment: ClusterAssignment, dist=None) -> float | None:
    return silhouette(points, assignment.labels, dist=dist)


def grid_search(points, spec: GridSpec, dist=None) -> SelectionResult:
    """Exhaustive search; argmax silhouette over admissible candidates.

    A candidate is inadmissible if it has fewer than two non-noise clusters,
    more than half its points labelled noise, or fails to build (e.g. BIRCH
    producing fewer subclusters than k).  Ties go to the earlier candidate.
    """
    candidates = spec.candidates()
    if not candidates:
        raise ValueError(f"empty grid for {spec.algorithm.value}")
    pts = np.asarray(points, dtype=float)
    if dist is None:
        dist = pairwise_distances(pts)
    run = _Runner(spec, pts, dist)
    best, best_sc = None, None
    for params in candidates:
        try:
            assignment = run(params)
        except ClusteringError:
            continue
        if not admissible(assignment):
            continue
        sc = score(pts, assignment, dist)
        if sc is not None and (best_sc is None or sc > best_sc):
            best, best_sc = assignment, sc
    return SelectionResult(best, best_sc, len(candidates), best is None, spec.algorithm)


def select_all(points, algorithms=None, grids: dict | None = None, seed: int = 0) -> dict:
    """Grid search for each algorithm on one trial; returns {Algorithm: SelectionResult}."""
    pts = np.asarray(points, dtype=float)
    dist = pairwise_distances(pts)
    out = {}
    for algo in algorithms or list(Algorithm):
        algo = Algorithm(algo)
        spec = (grids or {}).get(algo)
        if spec is None:
            spec = default_grid(algo, pts, dist, seed=seed)
        out[algo] = grid_search(pts, spec, dist)
    return out
