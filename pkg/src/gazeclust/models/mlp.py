import numpy as np

from ._base import Model, sigmoid

HIDDEN = (128, 32)


def init_params(sizes, rng):
    """He-uniform weights, zero biases; returns [W1, b1, W2, b2, ...]."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        params.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X):
    """Returns (logits, cache of layer inputs and pre-activations)."""
    acts, pres = [X], []
    h = X
    n_layers = len(params) // 2
    for layer in range(n_layers):
        W, b = params[2 * layer], params[2 * layer + 1]
        z = h @ W + b
        pres.append(z)
        h = np.maximum(z, 0.0) if layer < n_layers - 1 else z
        acts.append(h)
    return pres[-1][:, 0], (acts, pres)


def bce_loss(params, X, y) -> float:
    logits = forward(params, X)[0]
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def loss_and_grad(params, X, y):
    """Mean binary cross-entropy of sigmoid(logits) and its gradient."""
    logits, (acts, pres) = forward(params, X)
    n = len(X)
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    delta = ((sigmoid(logits) - y) / n)[:, None]
    grads = [None] * len(params)
    for layer in reversed(range(len(params) // 2)):
        grads[2 * layer] = acts[layer].T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer:
            delta = (delta @ params[2 * layer].T) * (pres[layer - 1] > 0)
    return loss, grads


class MLP(Model):
    """d -> 128 -> 32 -> 1 ReLU network, sigmoid output, trained with Adam."""

    def __init__(self, hidden=HIDDEN, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8,
                 batch_size=32, epochs=200, seed=0):
        self.hidden = tuple(hidden)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        X, y = self._check_fit(X, y)
        yb = y.astype(float)
        rng = np.random.default_rng(self.seed)
        params = init_params((X.shape[1], *self.hidden, 1), rng)
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        b1, b2, lr, eps = self.beta1, self.beta2, self.learning_rate, self.eps
        t = 0
        self.loss_trace_ = []
        n = len(X)
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                _, grads = loss_and_grad(params, X[idx], yb[idx])
                t += 1
                c1, c2 = 1 - b1**t, 1 - b2**t
                for p, g, mi, vi in zip(params, grads, m, v):
                    mi *= b1
                    mi += (1 - b1) * g
                    vi *= b2
                    vi += (1 - b2) * g * g
                    p -= lr * (mi / c1) / (np.sqrt(vi / c2) + eps)
            self.loss_trace_.append(bce_loss(params, X, yb))
        self.params_ = params
        return self

    def decision(self, X):
        X = self._check_predict(X)
        return sigmoid(forward(self.params_, X)[0])
