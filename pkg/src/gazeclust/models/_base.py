import numpy as np


class ModelError(ValueError):
    pass


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Model:
    """Binary classifier; labels are 0/1 with 1 the positive (ASD) class."""

    threshold = 0.5

    def _check_fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(int)
        if X.ndim != 2 or len(X) != len(y):
            raise ModelError("X must be 2-D with one row per label")
        if not np.isin(y, (0, 1)).all():
            raise ModelError("labels must be 0/1")
        if len(np.unique(y)) < 2:
            raise ModelError("training labels contain a single class")
        self.n_features_ = X.shape[1]
        return X, y

    def _check_predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features_:
            raise ModelError(f"expected {self.n_features_} features, got {X.shape[1]}")
        return X

    def fit(self, X, y):
        raise NotImplementedError

    def decision(self, X) -> np.ndarray:
        """Continuous score, larger meaning more likely positive."""
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return (self.decision(X) >= self.threshold).astype(int)
