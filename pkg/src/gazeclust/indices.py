"""Cluster validity indices.

Every index takes raw points and integer labels.  Noise (label -1) is
dropped first; with fewer than two clusters left, or when an index would
divide by zero, the result is ``None`` (MISSING) rather than a number.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .clustering.base import NOISE, ClusterAssignment, pairwise_distances

# Column order used in feature tables and reports.
INDEX_NAMES = ("sc", "ch", "db", "csl", "di", "db_star", "gd33", "pbm", "str")
INDEX_LABELS = {
    "sc": "SC",
    "ch": "CH",
    "db": "DB",
    "csl": "CSL",
    "di": "DI",
    "db_star": "DB*",
    "gd33": "GD33",
    "pbm": "PBM",
    "str": "STR",
}


@dataclass(frozen=True)
class IndexVector:
    sc: Optional[float] = None
    ch: Optional[float] = None
    db: Optional[float] = None
    db_star: Optional[float] = None
    di: Optional[float] = None
    csl: Optional[float] = None
    gd33: Optional[float] = None
    pbm: Optional[float] = None
    str: Optional[float] = None

    @classmethod
    def missing(cls) -> "IndexVector":
        return cls()

    @property
    def all_missing(self) -> bool:
        return all(getattr(self, name) is None for name in INDEX_NAMES)

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in INDEX_NAMES)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "IndexVector":
        return cls(**{name: d.get(name) for name in INDEX_NAMES})


class _Clusters:
    """Noise-stripped view with the per-cluster quantities most indices share."""

    def __init__(self, points, labels, dist=None):
        pts = np.asarray(points, dtype=float)
        labels = np.asarray(labels)
        keep = labels != NOISE
        if dist is not None and not keep.all():
            dist = dist[np.ix_(keep, keep)]
        self.points = pts[keep]
        uniq, self.labels = np.unique(labels[keep], return_inverse=True)
        self.k = len(uniq)
        self.n = len(self.points)
        if dist is not None:
            self.dist = dist

    @property
    def ok(self) -> bool:
        return self.k >= 2

    @cached_property
    def dist(self):
        return pairwise_distances(self.points)

    @cached_property
    def counts(self):
        return np.bincount(self.labels, minlength=self.k)

    @cached_property
    def onehot(self):
        return np.eye(self.k)[self.labels]

    @cached_property
    def centroids(self):
        sums = np.zeros((self.k, self.points.shape[1]))
        np.add.at(sums, self.labels, self.points)
        return sums / self.counts[:, None]

    @cached_property
    def own_distance(self):
        return np.linalg.norm(self.points - self.centroids[self.labels], axis=1)

    def centroid_distances(self):
        c = self.centroids
        return np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)


def _ratio(num, den):
    if den == 0 or not np.isfinite(num) or not np.isfinite(den):
        return None
    return float(num / den)


def _view(points, labels, dist):
    if isinstance(points, _Clusters):
        return points
    return _Clusters(points, labels, dist)


def silhouette(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    sums = c.dist @ c.onehot  # (n, k) distance totals to each cluster
    counts = c.counts
    own = c.labels
    rows = np.arange(c.n)
    own_n = counts[own]
    with np.errstate(invalid="ignore", divide="ignore"):
        a = sums[rows, own] / (own_n - 1)
        other = sums / counts[None, :]
    other[rows, own] = np.inf
    b = other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.zeros(c.n)
    ok = (own_n > 1) & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    return float(s.mean())


def calinski_harabasz(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok or c.n == c.k:
        return None
    cent = c.centroids
    overall = c.points.mean(axis=0)
    between = float(np.sum(c.counts * np.sum((cent - overall) ** 2, axis=1)))
    within = float(np.sum((c.points - cent[c.labels]) ** 2))
    return _ratio(between / (c.k - 1), within / (c.n - c.k))


def _scatter(c):
    return np.bincount(c.labels, weights=c.own_distance, minlength=c.k) / c.counts


def davies_bouldin(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    s = _scatter(c)
    m = c.centroid_distances()
    off = ~np.eye(c.k, dtype=bool)
    if np.any(m[off] == 0):
        return None
    r = (s[:, None] + s[None, :]) / np.where(off, m, 1.0)
    r[~off] = -np.inf
    return float(r.max(axis=1).mean())


def davies_bouldin_star(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    s = _scatter(c)
    m = c.centroid_distances()
    off = ~np.eye(c.k, dtype=bool)
    num = np.where(off, s[:, None] + s[None, :], -np.inf).max(axis=1)
    den = np.where(off, m, np.inf).min(axis=1)
    if np.any(den == 0):
        return None
    return float(np.mean(num / den))


def dunn(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    same = c.labels[:, None] == c.labels[None, :]
    sep = c.dist[~same].min()
    diam = c.dist[same].max()
    return _ratio(sep, diam)


def cs_index(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    same = c.labels[:, None] == c.labels[None, :]
    farthest = np.where(same, c.dist, 0.0).max(axis=1)
    num = float(np.sum(np.bincount(c.labels, weights=farthest, minlength=c.k) / c.counts))
    m = c.centroid_distances()
    np.fill_diagonal(m, np.inf)
    return _ratio(num, float(m.min(axis=1).sum()))


def gd33(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    oh = c.onehot
    counts = c.counts
    mean_between = (oh.T @ c.dist @ oh) / np.outer(counts, counts)
    off = ~np.eye(c.k, dtype=bool)
    delta = mean_between[off].min()
    big_delta = 2.0 * _scatter(c)
    return _ratio(delta, big_delta.max())


def _e_ratio(c):
    e1 = float(np.linalg.norm(c.points - c.points.mean(axis=0), axis=1).sum())
    ek = float(c.own_distance.sum())
    return _ratio(e1, ek)


def pbm(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    e = _e_ratio(c)
    if e is None:
        return None
    dk = float(c.centroid_distances().max())
    return float((e * dk / c.k) ** 2)


def str_index(points, labels=None, dist=None):
    c = _view(points, labels, dist)
    if not c.ok:
        return None
    e = _e_ratio(c)
    if e is None:
        return None
    m = c.centroid_distances()
    off = ~np.eye(c.k, dtype=bool)
    d = _ratio(float(m[off].max()), float(m[off].min()))
    return None if d is None else e * d


INDEX_FUNCTIONS = {
    "sc": silhouette,
    "ch": calinski_harabasz,
    "db": davies_bouldin,
    "csl": cs_index,
    "di": dunn,
    "db_star": davies_bouldin_star,
    "gd33": gd33,
    "pbm": pbm,
    "str": str_index,
}


def compute_all(points, assignment, dist=None) -> IndexVector:
    """All nine indices; ``assignment`` is a ClusterAssignment or a label array."""
    labels = assignment.labels if isinstance(assignment, ClusterAssignment) else assignment
    view = _Clusters(points, labels, dist)
    if not view.ok:
        return IndexVector.missing()
    return IndexVector(**{name: fn(view) for name, fn in INDEX_FUNCTIONS.items()})
