"""Ward agglomerative clustering and BIRCH."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import Algorithm, ClusterAssignment, ClusteringError, as_points, check_k, relabel_first_seen


@dataclass
class Merge:
    a: int
    b: int
    height: float
    size: int


def _ward_init(centers: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    diff = centers[:, None, :] - centers[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    w = 2.0 * np.outer(sizes, sizes) / (sizes[:, None] + sizes[None, :])
    return w * sq


def ward(centers, sizes=None, n_clusters: int = 1):
    """Bottom-up Ward merging with the Lance-Williams update.

    Works on (possibly weighted) starting clusters.  Merged clusters keep the
    lower slot index.  Distances are the Ward criterion
    2*n_a*n_b/(n_a+n_b) * |c_a - c_b|^2, i.e. twice the increase in
    within-cluster sum of squares; reported heights are their square roots.

    Returns (slot index per starting cluster, list of merges).
    """
    centers = np.asarray(centers, dtype=float)
    m = len(centers)
    sizes = np.ones(m) if sizes is None else np.asarray(sizes, dtype=float).copy()
    d2 = _ward_init(centers, sizes)
    np.fill_diagonal(d2, np.inf)
    slot = np.arange(m)
    merges = []
    for _ in range(m - n_clusters):
        flat = int(np.argmin(d2))
        i, j = divmod(flat, m)
        if i > j:
            i, j = j, i
        dij = d2[i, j]
        ni, nj = sizes[i], sizes[j]
        nk = sizes
        upd = ((ni + nk) * d2[i] + (nj + nk) * d2[j] - nk * dij) / (ni + nj + nk)
        d2[i, :] = upd
        d2[:, i] = upd
        d2[i, i] = np.inf
        d2[j, :] = np.inf
        d2[:, j] = np.inf
        sizes[i] = ni + nj
        slot[slot == j] = i
        merges.append(Merge(i, j, float(np.sqrt(max(dij, 0.0))), int(round(ni + nj))))
    return slot, merges


def agglomerative(points, k) -> ClusterAssignment:
    pts = as_points(points)
    check_k(pts, k)
    slot, merges = ward(pts, n_clusters=k)
    labels, _ = relabel_first_seen(slot)
    return ClusterAssignment(
        labels,
        Algorithm.AC,
        {"k": k, "linkage": "ward"},
        centroids=_means(pts, labels),
        trace=[m.height for m in merges],
    )


def _means(pts, labels):
    k = labels.max() + 1
    sums = np.zeros((k, pts.shape[1]))
    np.add.at(sums, labels, pts)
    return sums / np.bincount(labels, minlength=k)[:, None]


# ---------------------------------------------------------------- BIRCH


@dataclass
class _CF:
    n: float
    ls: np.ndarray
    ss: float

    @classmethod
    def of_point(cls, x):
        return cls(1.0, x.copy(), float(x @ x))

    def merged(self, other: "_CF") -> "_CF":
        return _CF(self.n + other.n, self.ls + other.ls, self.ss + other.ss)

    def add(self, other: "_CF") -> None:
        self.n += other.n
        self.ls = self.ls + other.ls
        self.ss += other.ss

    @property
    def centroid(self):
        return self.ls / self.n

    @property
    def radius(self) -> float:
        c = self.centroid
        return float(np.sqrt(max(self.ss / self.n - c @ c, 0.0)))


@dataclass
class _Subcluster:
    cf: _CF
    members: list[int] = field(default_factory=list)


@dataclass
class _Node:
    leaf: bool
    # leaves hold _Subcluster entries, inner nodes hold _Node children
    entries: list = field(default_factory=list)
    cf: _CF | None = None

    def recompute(self):
        cfs = [e.cf for e in self.entries]
        total = _CF(0.0, np.zeros_like(cfs[0].ls), 0.0)
        for c in cfs:
            total.add(c)
        self.cf = total


def _closest(entries, x):
    cents = np.array([e.cf.centroid for e in entries])
    return int(np.argmin(np.sum((cents - x) ** 2, axis=1)))


def _split(node: _Node):
    cents = np.array([e.cf.centroid for e in node.entries])
    diff = cents[:, None, :] - cents[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    a, b = divmod(int(np.argmax(sq)), len(cents))
    left, right = _Node(node.leaf), _Node(node.leaf)
    for idx, e in enumerate(node.entries):
        (left if sq[idx, a] <= sq[idx, b] else right).entries.append(e)
    left.recompute()
    right.recompute()
    return left, right


class CFTree:
    """Single-pass CF tree; ``branching`` bounds both leaf and inner fan-out."""

    def __init__(self, threshold: float, branching: int = 50):
        if threshold <= 0:
            raise ClusteringError("threshold must be > 0")
        if branching < 2:
            raise ClusteringError("branching must be >= 2")
        self.threshold = threshold
        self.branching = branching
        self.root = _Node(leaf=True)
        self.subclusters: list[_Subcluster] = []

    def insert(self, x: np.ndarray, index: int) -> None:
        point = _CF.of_point(x)
        split = self._insert(self.root, x, point, index)
        if split is not None:
            root = _Node(leaf=False, entries=list(split))
            root.recompute()
            self.root = root

    def _insert(self, node: _Node, x, point: _CF, index):
        if node.leaf:
            sub = None
            if node.entries:
                cand = node.entries[_closest(node.entries, x)]
                if cand.cf.merged(point).radius <= self.threshold:
                    sub = cand
                    sub.cf.add(point)
                    sub.members.append(index)
            if sub is None:
                sub = _Subcluster(_CF.of_point(x), [index])
                self.subclusters.append(sub)
                node.entries.append(sub)
        else:
            i = _closest(node.entries, x)
            split = self._insert(node.entries[i], x, point, index)
            if split is not None:
                node.entries[i : i + 1] = list(split)
        if len(node.entries) > self.branching:
            return _split(node)
        node.recompute()
        return None


def birch(points, threshold, branching=50, k=2) -> ClusterAssignment:
    """CF-tree pass, then weighted Ward over leaf-subcluster centroids."""
    pts = as_points(points)
    check_k(pts, k)
    tree = CFTree(threshold, branching)
    for i, x in enumerate(pts):
        tree.insert(x, i)
    subs = tree.subclusters
    if len(subs) < k:
        raise ClusteringError(f"insufficient subclusters: {len(subs)} < k={k}")
    centers = np.array([s.cf.centroid for s in subs])
    sizes = np.array([s.cf.n for s in subs])
    slot, merges = ward(centers, sizes, n_clusters=k)
    raw = np.empty(len(pts), dtype=int)
    for s, sub in zip(slot, subs):
        raw[sub.members] = s
    labels, _ = relabel_first_seen(raw)
    return ClusterAssignment(
        labels,
        Algorithm.BIRCH,
        {"k": k, "threshold": float(threshold), "branching": branching, "n_subclusters": len(subs)},
        centroids=_means(pts, labels),
        trace=[m.height for m in merges],
    )
