"""CART classification trees, random forest and gradient-boosted trees."""
from __future__ import annotations

import math

import numpy as np

from ._base import Model, sigmoid


class _TreeArrays:
    """Flat binary tree; ``feature < 0`` marks a leaf."""

    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add(self, value) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.feature) - 1

    def freeze(self):
        self.feature = np.array(self.feature, dtype=int)
        self.threshold = np.array(self.threshold, dtype=float)
        self.left = np.array(self.left, dtype=int)
        self.right = np.array(self.right, dtype=int)
        self.value = np.array(self.value, dtype=float)
        return self

    def apply(self, X) -> np.ndarray:
        node = np.zeros(len(X), dtype=int)
        rows = np.arange(len(X))
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return node
            r, n, f = rows[inner], node[inner], feat[inner]
            go_left = X[r, f] <= self.threshold[n]
            node[r] = np.where(go_left, self.left[n], self.right[n])

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())


def _sorted_columns(X, idx, feats):
    sub = X[np.ix_(idx, feats)]
    order = np.argsort(sub, axis=0, kind="stable")
    vals = np.take_along_axis(sub, order, axis=0)
    return order, vals


def _threshold(lo, hi):
    mid = (lo + hi) / 2.0
    return lo if mid >= hi else mid


def gini_split(X, y, idx, feats):
    """Best Gini split of rows ``idx`` over ``feats`` (sorted ascending).

    Returns (feature, threshold) or None when no feature separates the rows.
    Ties go to the lower feature index, then the lower threshold.
    """
    n = len(idx)
    order, vals = _sorted_columns(X, idx, feats)
    ys = y[idx][order]  # (n, f)
    pos_left = np.cumsum(ys, axis=0)[:-1]
    n_left = np.arange(1, n)[:, None]
    pos = ys[:, 0].sum()
    n_right = n - n_left
    pos_right = pos - pos_left
    neg_left = n_left - pos_left
    neg_right = n_right - pos_right
    # weighted child impurity up to the constant n
    cost = -((pos_left**2 + neg_left**2) / n_left + (pos_right**2 + neg_right**2) / n_right)
    valid = vals[1:] > vals[:-1]
    if not valid.any():
        return None
    cost = np.where(valid, cost, np.inf).T  # (f, n-1): feature-major for tie order
    f_i, pos_i = divmod(int(np.argmin(cost)), n - 1)
    return int(feats[f_i]), _threshold(vals[pos_i, f_i], vals[pos_i + 1, f_i])


class DecisionTree(Model):
    """CART with Gini impurity; leaves score the positive-class fraction."""

    def __init__(self, max_depth=None, min_samples_split=2, max_features=None, seed=0):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.seed = seed

    def _candidate_features(self, rng, n_features):
        if self.max_features is None or self.max_features >= n_features:
            return np.arange(n_features), None
        chosen = np.sort(rng.choice(n_features, self.max_features, replace=False))
        rest = np.setdiff1d(np.arange(n_features), chosen)
        return chosen, rest

    def _fit(self, X, y, rows=None, rng=None):
        rng = rng or np.random.default_rng(self.seed)
        yb = (y == 1).astype(float)
        rows = np.arange(len(X)) if rows is None else rows
        tree = _TreeArrays()
        root = tree.add(yb[rows].mean())
        stack = [(root, rows, 0)]
        while stack:
            node, idx, depth = stack.pop()
            p = yb[idx].mean()
            if p in (0.0, 1.0) or len(idx) < self.min_samples_split:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            feats, rest = self._candidate_features(rng, X.shape[1])
            split = gini_split(X, yb, idx, feats)
            if split is None and rest is not None and rest.size:
                split = gini_split(X, yb, idx, rest)
            if split is None:
                continue
            f, thr = split
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            tree.feature[node], tree.threshold[node] = f, thr
            tree.left[node] = tree.add(yb[li].mean())
            tree.right[node] = tree.add(yb[ri].mean())
            stack.append((tree.right[node], ri, depth + 1))
            stack.append((tree.left[node], li, depth + 1))
        return tree.freeze()

    def fit(self, X, y):
        X, y = self._check_fit(X, y)
        self.tree_ = self._fit(X, y)
        return self

    def decision(self, X):
        return self.tree_.predict(self._check_predict(X))


class RandomForest(Model):
    def __init__(self, n_trees=300, max_features="sqrt", seed=0):
        self.n_trees = n_trees
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y):
        X, y = self._check_fit(X, y)
        n, d = X.shape
        m = math.ceil(math.sqrt(d)) if self.max_features == "sqrt" else int(self.max_features)
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        self.trees_ = []
        for ss in seeds:
            rng = np.random.default_rng(ss)
            rows = rng.integers(n, size=n)
            learner = DecisionTree(max_features=m)
            self.trees_.append(learner._fit(X, y, rows=rows, rng=rng))
        return self

    def decision(self, X):
        X = self._check_predict(X)
        return np.mean([t.predict(X) for t in self.trees_], axis=0)


# ------------------------------------------------------------ gradient boosting


def _newton_split(X, g, h, idx, lam, min_child_weight):
    n = len(idx)
    feats = np.arange(X.shape[1])
    order, vals = _sorted_columns(X, idx, feats)
    gs, hs = g[idx][order], h[idx][order]
    gl = np.cumsum(gs, axis=0)[:-1]
    hl = np.cumsum(hs, axis=0)[:-1]
    G, H = gs[:, 0].sum(), hs[:, 0].sum()
    gr, hr = G - gl, H - hl
    gain = gl**2 / (hl + lam) + gr**2 / (hr + lam) - G**2 / (H + lam)
    valid = (vals[1:] > vals[:-1]) & (hl >= min_child_weight) & (hr >= min_child_weight)
    gain = np.where(valid, gain, -np.inf).T
    flat = int(np.argmax(gain))
    f_i, pos_i = divmod(flat, n - 1)
    if not np.isfinite(gain.flat[flat]) or gain.flat[flat] <= 0:
        return None
    return int(f_i), _threshold(vals[pos_i, f_i], vals[pos_i + 1, f_i])


def newton_tree(X, g, h, rows, depth=3, lam=1.0, min_child_weight=1.0):
    """Regression tree on gradient/hessian pairs; leaf weight -G/(H + lam)."""
    tree = _TreeArrays()

    def leaf_value(idx):
        return -g[idx].sum() / (h[idx].sum() + lam)

    root = tree.add(leaf_value(rows))
    stack = [(root, rows, 0)]
    while stack:
        node, idx, d = stack.pop()
        if d >= depth or len(idx) < 2:
            continue
        split = _newton_split(X, g, h, idx, lam, min_child_weight)
        if split is None:
            continue
        f, thr = split
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        tree.feature[node], tree.threshold[node] = f, thr
        tree.left[node] = tree.add(leaf_value(li))
        tree.right[node] = tree.add(leaf_value(ri))
        stack.append((tree.right[node], ri, d + 1))
        stack.append((tree.left[node], li, d + 1))
    return tree.freeze()


def logistic_loss(F, y) -> float:
    # mean of log(1 + e^F) - y F, computed stably
    return float(np.mean(np.logaddexp(0.0, F) - y * F))


class GradBoost(Model):
    """Boosted depth-limited trees on the logistic loss (second-order leaves).

    A round whose step would raise the full training loss is shrunk by
    halving, so the recorded loss never increases.
    """

    def __init__(self, n_rounds=200, max_depth=3, learning_rate=0.1, subsample=0.8, lam=1.0,
                 min_child_weight=1.0, seed=0):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.subsample = subsample
        self.lam = lam
        self.min_child_weight = min_child_weight
        self.seed = seed

    def fit(self, X, y):
        X, y = self._check_fit(X, y)
        yb = (y == 1).astype(float)
        rng = np.random.default_rng(self.seed)
        p0 = yb.mean()
        self.base_ = float(np.log(p0 / (1 - p0)))
        F = np.full(len(X), self.base_)
        n_sub = max(1, int(round(self.subsample * len(X))))
        self.trees_, self.weights_ = [], []
        self.loss_trace_ = [logistic_loss(F, yb)]
        for _ in range(self.n_rounds):
            p = sigmoid(F)
            g, h = p - yb, p * (1 - p)
            rows = np.sort(rng.choice(len(X), n_sub, replace=False))
            tree = newton_tree(X, g, h, rows, self.max_depth, self.lam, self.min_child_weight)
            step = tree.predict(X)
            rate = self.learning_rate
            loss = logistic_loss(F + rate * step, yb)
            for _ in range(30):
                if loss <= self.loss_trace_[-1]:
                    break
                rate /= 2
                loss = logistic_loss(F + rate * step, yb)
            else:
                rate, loss = 0.0, self.loss_trace_[-1]
            F = F + rate * step
            self.trees_.append(tree)
            self.weights_.append(rate)
            self.loss_trace_.append(loss)
        return self

    def raw(self, X):
        X = self._check_predict(X)
        F = np.full(len(X), self.base_)
        for w, t in zip(self.weights_, self.trees_):
            if w:
                F += w * t.predict(X)
        return F

    def decision(self, X):
        return sigmoid(self.raw(X))
