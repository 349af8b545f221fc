import numpy as np

from .base import Algorithm, ClusterAssignment, as_points, check_k, pairwise_distances, relabel_first_seen


def _build(dist: np.ndarray, k: int) -> list[int]:
    medoids = [int(np.argmin(dist.sum(axis=0)))]
    nearest = dist[:, medoids[0]].copy()
    for _ in range(1, k):
        # total cost if each candidate were added
        cost = np.minimum(dist, nearest[:, None]).sum(axis=0)
        cost[medoids] = np.inf
        m = int(np.argmin(cost))
        medoids.append(m)
        nearest = np.minimum(nearest, dist[:, m])
    return medoids


def _nearest_two(dist, medoids):
    dm = dist[:, medoids]
    order = np.argsort(dm, axis=1, kind="stable")
    rows = np.arange(len(dist))
    return order[:, 0], dm[rows, order[:, 0]], dm[rows, order[:, 1]]


def pam(dist: np.ndarray, k: int, max_iter: int = 100):
    """PAM on a precomputed distance matrix.

    Returns (medoid indices, total-cost trace).  Each SWAP applies the single
    best (medoid, non-medoid) exchange, so the trace strictly decreases.
    """
    n = len(dist)
    medoids = _build(dist, k)
    near, d1, d2 = _nearest_two(dist, medoids)
    trace = [float(d1.sum())]
    for _ in range(max_iter):
        best_cost, best = trace[-1], None
        is_medoid = np.zeros(n, dtype=bool)
        is_medoid[medoids] = True
        for i in range(k):
            base = np.where(near == i, d2, d1)
            cost = np.minimum(dist, base[:, None]).sum(axis=0)
            cost[is_medoid] = np.inf
            h = int(np.argmin(cost))
            if cost[h] < best_cost - 1e-12 * max(1.0, best_cost):
                best_cost, best = float(cost[h]), (i, h)
        if best is None:
            break
        medoids[best[0]] = best[1]
        near, d1, d2 = _nearest_two(dist, medoids)
        trace.append(float(d1.sum()))
    return medoids, trace


def kmedoids(points, k, seed=0, max_iter=100, dist=None) -> ClusterAssignment:
    """K-Medoids via PAM (BUILD then SWAP).  PAM is deterministic; ``seed`` is recorded only."""
    pts = as_points(points)
    check_k(pts, k)
    if dist is None:
        dist = pairwise_distances(pts)
    medoids, trace = pam(dist, k, max_iter=max_iter)
    labels = np.argmin(dist[:, medoids], axis=1)
    labels, order = relabel_first_seen(labels)
    medoids = [medoids[o] for o in order]
    return ClusterAssignment(
        labels,
        Algorithm.KMEDOIDS,
        {"k": k, "seed": seed, "max_iter": max_iter, "medoids": [int(m) for m in medoids]},
        centroids=pts[medoids],
        trace=trace,
    )
