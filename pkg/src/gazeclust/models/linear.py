"""Logistic regression, RBF-kernel SVM and k-nearest neighbours."""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ._base import Model, sigmoid


class LogisticRegression(Model):
    """Full-batch gradient descent on mean log-loss + (l2/2)|w|^2 (bias unpenalised)."""

    def __init__(self, l2=1e-4, learning_rate=0.1, n_iter=1000, seed=0):
        self.l2 = l2
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.seed = seed

    def fit(self, X, y):
        X, y = self._check_fit(X, y)
        n, d = X.shape
        w, b = np.zeros(d), 0.0
        yb = y.astype(float)
        for _ in range(self.n_iter):
            r = sigmoid(X @ w + b) - yb
            w -= self.learning_rate * (X.T @ r / n + self.l2 * w)
            b -= self.learning_rate * r.mean()
        self.coef_, self.intercept_ = w, b
        return self

    def decision(self, X):
        X = self._check_predict(X)
        return sigmoid(X @ self.coef_ + self.intercept_)


def rbf_kernel(A, B, gamma):
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


class SVM(Model):
    """C-SVM with an RBF kernel, trained by SMO with second-order working-set selection.

    Scores are signed margins; the decision threshold is 0.
    """

    threshold = 0.0

    def __init__(self, C=1.0, gamma="scale", tol=1e-3, max_iter=100_000, seed=0):
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed

    def fit(self, X, y):
        X, y01 = self._check_fit(X, y)
        y = np.where(y01 == 1, 1.0, -1.0)
        n, d = X.shape
        if self.gamma == "scale":
            var = X.var()
            self.gamma_ = 1.0 / (d * var) if var > 0 else 1.0
        else:
            self.gamma_ = float(self.gamma)
        K = rbf_kernel(X, X, self.gamma_)
        diag = np.diag(K).copy()
        C = self.C
        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a
        tau = 1e-12
        self.n_iter_ = 0
        for it in range(self.max_iter):
            up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
            low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
            score = -y * grad
            s_up = np.where(up, score, -np.inf)
            i = int(np.argmax(s_up))
            m_val = s_up[i]
            s_low = np.where(low, score, np.inf)
            if m_val - s_low.min() < self.tol:
                break
            b = m_val - score
            a = diag[i] + diag - 2.0 * K[i]
            a = np.where(a > 0, a, tau)
            cand = low & (score < m_val)
            obj = np.where(cand, -(b**2) / a, np.inf)
            j = int(np.argmin(obj))
            step = b[j] / a[j]
            step = min(step, C - alpha[i] if y[i] > 0 else alpha[i])
            step = min(step, alpha[j] if y[j] > 0 else C - alpha[j])
            alpha[i] += y[i] * step
            alpha[j] -= y[j] * step
            grad += y * step * (K[:, i] - K[:, j])
            self.n_iter_ = it + 1
        free = (alpha > 0) & (alpha < C)
        score = -y * grad
        if free.any():
            self.bias_ = float(score[free].mean())
        else:
            up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
            low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
            hi = score[up].max() if up.any() else 0.0
            lo = score[low].min() if low.any() else 0.0
            self.bias_ = float((hi + lo) / 2)
        sv = alpha > 0
        self.support_vectors_ = X[sv]
        self.dual_coef_ = (alpha * y)[sv]
        self.alpha_ = alpha
        return self

    def decision(self, X):
        X = self._check_predict(X)
        if len(self.support_vectors_) == 0:
            return np.full(len(X), self.bias_)
        return rbf_kernel(X, self.support_vectors_, self.gamma_) @ self.dual_coef_ + self.bias_


class KNN(Model):
    """Uniform-vote k-NN; the score is the positive fraction among the neighbours."""

    def __init__(self, k=5, seed=0):
        self.k = k
        self.seed = seed

    def fit(self, X, y):
        X, y = self._check_fit(X, y)
        self.X_, self.y_ = X, y
        return self

    def decision(self, X):
        X = self._check_predict(X)
        k = min(self.k, len(self.X_))
        d = cdist(X, self.X_)
        # stable sort: equidistant neighbours resolved by training order
        nn = np.argsort(d, axis=1, kind="stable")[:, :k]
        return self.y_[nn].mean(axis=1)
