from __future__ import annotations

import numpy as np

from .base import MetaClassifier, prepare


class KNearestNeighbors(MetaClassifier):
    """Brute-force Euclidean kNN with majority vote.

    Distance ties keep the smaller training index; vote ties go to the
    smaller label.
    """

    kind = "knn"
    magic = b"DSKN"

    def __init__(self, k: int = 32):
        super().__init__()
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k

    def fit(self, X, y, num_classes=None):
        X, y, c = prepare(X, y, num_classes)
        if self.k > len(X):
            raise ValueError(f"k={self.k} exceeds the {len(X)} training samples")
        self.X, self.y, self.num_classes = X, y, c
        return self

    def neighbors(self, X, chunk: int = 256) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        out = []
        for s in range(0, len(X), chunk):
            d2 = ((X[s:s + chunk, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            out.append(np.argsort(d2, axis=1, kind="stable")[:, :self.k])
        return np.concatenate(out) if out else np.zeros((0, self.k), dtype=np.int64)

    def decision(self, X):
        nb = self.neighbors(X)
        votes = np.zeros((len(nb), self.num_classes))
        for j in range(self.k):
            votes[np.arange(len(nb)), self.y[nb[:, j]]] += 1
        return votes

    def get_state(self):
        return {"k": self.k}, {"X": self.X, "y": self.y}

    def set_state(self, header, arrays):
        self.k = header["k"]
        self.X, self.y = arrays["X"], arrays["y"]
