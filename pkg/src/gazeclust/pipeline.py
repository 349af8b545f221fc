"""In-process orchestration of the analysis stages, shared by the CLI and scripts."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .clustering.base import ALGORITHMS, Algorithm
from .features import FeatureMatrix, build_feature_matrix
from .gaze_io import Trial, check_unique_keys, filter_valid
from .indices import IndexVector, compute_all
from .selection import GridSpec, SelectionResult, default_grid, grid_search
from .clustering.base import pairwise_distances

log = logging.getLogger(__name__)


def prepare(trials: Sequence[Trial]) -> tuple[list[Trial], list[Trial]]:
    """Filter invalid points; split into (usable, degenerate) trials."""
    check_unique_keys(trials)
    usable, degenerate = [], []
    for tr in trials:
        f = filter_valid(tr)
        (degenerate if f.degenerate else usable).append(f)
    if degenerate:
        log.info("%d trials have fewer than 10 valid points and are skipped", len(degenerate))
    return usable, degenerate


def _grid_for(algo: Algorithm, overrides: dict, points, dist, seed: int) -> GridSpec:
    base = default_grid(algo, points, dist, seed=seed)
    extra = overrides.get(algo.value) or {}
    if not extra:
        return base
    fields = {k: getattr(base, k) for k in ("k", "eps", "min_pts", "xi", "threshold", "branching", "seed")}
    fields.update(extra)
    return GridSpec(algo, **fields)


def cluster_trial(trial: Trial, grid_overrides: dict | None = None, seed: int = 0, algorithms=None):
    """Grid search and index vector for each algorithm on one (filtered) trial."""
    pts = trial.xy
    dist = pairwise_distances(pts)
    out = {}
    for algo in algorithms or ALGORITHMS:
        algo = Algorithm(algo)
        spec = _grid_for(algo, grid_overrides or {}, pts, dist, seed)
        res = grid_search(pts, spec, dist)
        vec = IndexVector.missing() if res.degenerate else compute_all(pts, res.best, dist)
        out[algo] = (res, vec)
    return out


def _cluster_job(args):
    trial, overrides, seed = args
    return trial.key, cluster_trial(trial, overrides, seed)


def default_jobs() -> int:
    return os.cpu_count() or 1


def cluster_trials(trials: Sequence[Trial], grid_overrides=None, seed=0, jobs: int | None = None):
    """{trial key: {Algorithm: (SelectionResult, IndexVector)}}; output independent of ``jobs``."""
    jobs = default_jobs() if jobs is None else jobs
    work = [(tr, grid_overrides, seed) for tr in trials]
    if jobs <= 1 or len(work) <= 1:
        results = map(_cluster_job, work)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cluster_job, work, chunksize=max(1, len(work) // (4 * jobs))))
    return dict(results)


def features_from_results(trials: Sequence[Trial], results: dict) -> FeatureMatrix:
    sel: dict[tuple, SelectionResult] = {}
    vecs: dict[tuple, IndexVector] = {}
    for tr in trials:
        for algo, (res, vec) in results[tr.key].items():
            sel[(tr.key, algo)] = res
            vecs[(tr.key, algo)] = vec
    return build_feature_matrix(trials, sel, vecs)
