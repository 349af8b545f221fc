"""DBSCAN and OPTICS (xi-steepness extraction)."""
from __future__ import annotations

from dataclasses import dataclass
from collections import deque

import numpy as np

from .base import NOISE, Algorithm, ClusterAssignment, ClusteringError, as_points, pairwise_distances, relabel_first_seen


def _check_min_pts(min_pts):
    if min_pts < 2:
        raise ClusteringError(f"min_pts must be >= 2, got {min_pts}")


def dbscan(points, eps, min_pts, dist=None) -> ClusterAssignment:
    """Core points have >= min_pts neighbours within eps, counting themselves.

    Clusters are numbered in the order their first core point is met while
    scanning the input; a border point joins the first cluster that reaches it.
    """
    if eps <= 0:
        raise ClusteringError(f"eps must be > 0, got {eps}")
    _check_min_pts(min_pts)
    pts = as_points(points)
    if dist is None:
        dist = pairwise_distances(pts)
    nbr = dist <= eps
    core = nbr.sum(axis=1) >= min_pts
    labels = np.full(len(pts), NOISE)
    cluster = 0
    for i in range(len(pts)):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            p = queue.popleft()
            fresh = np.flatnonzero(nbr[p] & (labels == NOISE))
            labels[fresh] = cluster
            queue.extend(int(q) for q in fresh if core[q])
        cluster += 1
    return ClusterAssignment(labels, Algorithm.DBSCAN, {"eps": float(eps), "min_pts": int(min_pts)})


@dataclass
class Reachability:
    ordering: np.ndarray
    reachability: np.ndarray  # indexed by point, inf for the first point of the walk
    core_distance: np.ndarray
    predecessor: np.ndarray  # -1 where undefined


def optics_ordering(points, min_pts, dist=None) -> Reachability:
    """Reachability walk with unbounded eps.

    Points are visited in lexicographic (x, y) order: the walk starts at the
    smallest point and reachability ties go to the smaller point, so the
    result does not depend on input order.  Returned arrays use input indices.
    """
    _check_min_pts(min_pts)
    pts = as_points(points)
    n = len(pts)
    if dist is None:
        dist = pairwise_distances(pts)
    perm = np.lexsort(pts.T[::-1])
    dist = dist[np.ix_(perm, perm)]
    m = min(min_pts, n)
    core = np.partition(dist, m - 1, axis=1)[:, m - 1]
    reach = np.full(n, np.inf)
    pred = np.full(n, -1)
    done = np.zeros(n, dtype=bool)
    ordering = np.empty(n, dtype=int)
    p = 0
    for step in range(n):
        ordering[step] = p
        done[p] = True
        cand = np.maximum(dist[p], core[p])
        better = ~done & (cand < reach)
        reach[better] = cand[better]
        pred[better] = p
        if step + 1 < n:
            masked = np.where(done, np.inf, reach)
            p = int(np.argmin(masked))
            if done[p]:
                # only possible when every remaining reach is inf
                p = int(np.flatnonzero(~done)[0])
    out_reach, out_core, out_pred = np.empty(n), np.empty(n), np.full(n, -1)
    out_reach[perm], out_core[perm] = reach, core
    out_pred[perm] = np.where(pred >= 0, perm[np.maximum(pred, 0)], -1)
    return Reachability(perm[ordering], out_reach, out_core, out_pred)


def _extend_region(steep, against, start, min_pts):
    """Last index of the steep area beginning at ``start``.

    The area may contain flat or mildly sloped stretches of at most
    ``min_pts`` consecutive non-steep points; it ends at the first point
    sloping the opposite way.
    """
    end = start
    run = 0
    for i in range(start, len(steep)):
        if steep[i]:
            run = 0
            end = i
        elif not against[i]:
            run += 1
            if run > min_pts:
                break
        else:
            break
    return end


def _correct_predecessor(plot, pred_plot, ordering, s, e):
    while s < e:
        if plot[s] > plot[e]:
            return s, e
        if pred_plot[e] in ordering[s:e]:
            return s, e
        e -= 1
    return None


def xi_clusters(reach: Reachability, xi: float, min_pts: int, min_cluster_size: int | None = None):
    """Intervals [start, end] of the reachability plot found by xi-steepness.

    Returned nested-first: for each steep-up area, inner (shorter) clusters
    precede the clusters that enclose them.
    """
    if not 0 < xi < 1:
        raise ClusteringError(f"xi must lie in (0, 1), got {xi}")
    min_size = min_pts if min_cluster_size is None else min_cluster_size
    plot = np.append(reach.reachability[reach.ordering], np.inf)
    pred_plot = reach.predecessor[reach.ordering]
    keep = 1.0 - xi
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = plot[:-1] / plot[1:]
    steep_up = ratio <= keep
    steep_down = ratio >= 1.0 / keep
    down = ratio > 1
    up = ratio < 1

    sdas: list[dict] = []
    clusters = []
    index = 0
    mib = 0.0

    def filter_sdas(mib):
        if np.isinf(mib):
            return []
        kept = [d for d in sdas if mib <= plot[d["start"]] * keep]
        for d in kept:
            d["mib"] = max(d["mib"], mib)
        return kept

    for i in np.flatnonzero(steep_up | steep_down):
        if i < index:
            continue
        mib = max(mib, float(np.max(plot[index : i + 1])))
        if steep_down[i]:
            sdas = filter_sdas(mib)
            d_end = _extend_region(steep_down, up, i, min_pts)
            sdas.append({"start": int(i), "end": d_end, "mib": 0.0})
            index = d_end + 1
            mib = float(plot[index])
            continue

        sdas = filter_sdas(mib)
        u_start = int(i)
        u_end = _extend_region(steep_up, down, u_start, min_pts)
        index = u_end + 1
        mib = float(plot[index])
        found = []
        for d in sdas:
            start, end = d["start"], u_end
            after = plot[end + 1]
            if after * keep < d["mib"]:
                continue
            top = plot[d["start"]]
            if top * keep >= after:
                while plot[start + 1] > after and start < d["end"]:
                    start += 1
            elif after * keep >= top:
                while plot[end - 1] > top and end > u_start:
                    end -= 1
            fixed = _correct_predecessor(plot, pred_plot, reach.ordering, start, end)
            if fixed is None:
                continue
            start, end = fixed
            if end - start + 1 < min_size or start > d["end"] or end < u_start:
                continue
            found.append((start, end))
        clusters.extend(reversed(found))
    return clusters


def optics(points, min_pts, xi=0.05, dist=None, reach: Reachability | None = None) -> ClusterAssignment:
    """OPTICS with unbounded eps; leaf xi-clusters become labels, the rest noise."""
    pts = as_points(points)
    if reach is None:
        reach = optics_ordering(pts, min_pts, dist=dist)
    intervals = xi_clusters(reach, xi, min_pts)
    in_order = np.full(len(pts), NOISE)
    label = 0
    for s, e in intervals:
        if s == 0 and e == len(pts) - 1:
            # a cluster spanning the whole ordering separates nothing
            continue
        if np.all(in_order[s : e + 1] == NOISE):
            in_order[s : e + 1] = label
            label += 1
    labels = np.empty_like(in_order)
    labels[reach.ordering] = in_order
    labels, _ = relabel_first_seen(labels)
    return ClusterAssignment(labels, Algorithm.OPTICS, {"min_pts": int(min_pts), "xi": float(xi)})
