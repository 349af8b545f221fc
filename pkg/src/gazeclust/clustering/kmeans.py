import numpy as np

from .base import Algorithm, ClusterAssignment, as_points, check_k, relabel_first_seen


def kmeans_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    idx = [int(rng.integers(n))]
    d2 = np.sum((points - points[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        d2 = np.minimum(d2, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[idx].copy()


def _assign(points, centers):
    d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    # argmin returns the first minimum: ties go to the lower cluster index
    labels = np.argmin(d2, axis=1)
    return labels, float(d2[np.arange(len(points)), labels].sum())


def _update(points, labels, centers):
    new = centers.copy()
    k = len(centers)
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros_like(centers)
    np.add.at(sums, labels, points)
    filled = counts > 0
    new[filled] = sums[filled] / counts[filled, None]
    return new


def lloyd(points, centers, max_iter=300, tol=1e-4):
    """Lloyd iterations from the given centres.

    Returns (labels, centers, wcss_trace); the trace holds the WCSS after
    every assignment step and is non-increasing.
    """
    trace = []
    for _ in range(max_iter):
        labels, wcss = _assign(points, centers)
        trace.append(wcss)
        new = _update(points, labels, centers)
        shift = np.sqrt(np.max(np.sum((new - centers) ** 2, axis=1)))
        centers = new
        if shift < tol:
            break
    labels, wcss = _assign(points, centers)
    trace.append(wcss)
    return labels, centers, trace


def kmeans(points, k, seed=0, max_iter=300, tol=1e-4) -> ClusterAssignment:
    pts = as_points(points)
    check_k(pts, k)
    rng = np.random.default_rng(seed)
    centers = kmeans_plusplus(pts, k, rng)
    labels, centers, trace = lloyd(pts, centers, max_iter=max_iter, tol=tol)
    labels, order = relabel_first_seen(labels)
    return ClusterAssignment(
        labels,
        Algorithm.KMEANS,
        {"k": k, "seed": seed, "max_iter": max_iter, "tol": tol},
        centroids=centers[order],
        trace=trace,
    )


def wcss(points, labels) -> float:
    pts = as_points(points)
    labels = np.asarray(labels)
    total = 0.0
    for c in np.unique(labels):
        members = pts[labels == c]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total
