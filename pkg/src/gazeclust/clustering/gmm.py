import numpy as np
from scipy.special import logsumexp

from .base import Algorithm, ClusterAssignment, as_points, check_k, relabel_first_seen
from .kmeans import kmeans

COV_FLOOR = 1e-6


def _floor_cov(cov):
    # Eigenvalue clipping is the exact maximiser of the M-step under cov >= floor*I,
    # so EM stays monotone.
    w, v = np.linalg.eigh(cov)
    w = np.maximum(w, COV_FLOOR)
    return np.einsum("kij,kj,klj->kil", v, w, v)


def _m_step(pts, resp, prev=None):
    n, d = pts.shape
    nk = resp.sum(axis=0)
    k = len(nk)
    means = (resp.T @ pts) / np.maximum(nk, np.finfo(float).tiny)[:, None]
    diff = pts[None, :, :] - means[:, None, :]
    cov = np.einsum("nk,kni,knj->kij", resp, diff, diff) / np.maximum(nk, np.finfo(float).tiny)[:, None, None]
    empty = nk < 1e-12 * n
    if prev is not None and empty.any():
        means[empty] = prev[1][empty]
        cov[empty] = prev[2][empty]
    elif empty.any():
        cov[empty] = np.eye(d)
    weights = nk / n
    return weights, means, _floor_cov(cov)


def _log_joint(pts, weights, means, cov):
    d = pts.shape[1]
    chol = np.linalg.cholesky(cov)
    diff = pts[None, :, :] - means[:, None, :]  # (k, n, d)
    sol = np.linalg.solve(chol, diff.transpose(0, 2, 1))  # (k, d, n)
    maha = np.sum(sol**2, axis=1)  # (k, n)
    logdet = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=1, axis2=2)), axis=1)
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    logp = -0.5 * (d * np.log(2 * np.pi) + logdet[:, None] + maha) + logw[:, None]
    return logp.T  # (n, k)


def gmm(points, k, seed=0, max_iter=100, tol=1e-6) -> ClusterAssignment:
    """EM for a full-covariance Gaussian mixture, initialised from k-means.

    ``trace`` holds the mean per-point log-likelihood before each M-step.
    Iteration stops once the per-point improvement is below ``tol``.
    """
    pts = as_points(points)
    check_k(pts, k)
    init = kmeans(pts, k, seed=seed)
    resp = np.zeros((len(pts), k))
    resp[np.arange(len(pts)), init.labels] = 1.0
    params = _m_step(pts, resp)
    trace = []
    for _ in range(max_iter):
        logp = _log_joint(pts, *params)
        norm = logsumexp(logp, axis=1)
        ll = float(norm.mean())
        resp = np.exp(logp - norm[:, None])
        converged = bool(trace) and ll - trace[-1] < tol
        trace.append(ll)
        if converged:
            break
        params = _m_step(pts, resp, prev=params)
    else:
        logp = _log_joint(pts, *params)
        norm = logsumexp(logp, axis=1)
        trace.append(float(norm.mean()))
        resp = np.exp(logp - norm[:, None])

    labels, order = relabel_first_seen(np.argmax(resp, axis=1))
    return ClusterAssignment(
        labels,
        Algorithm.GMM,
        {"k": k, "seed": seed, "max_iter": max_iter, "tol": tol},
        centroids=params[1][order],
        trace=trace,
    )
