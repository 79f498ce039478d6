from __future__ import annotations

import numpy as np

from ..numerics.rng import Rng
from .base import MetaClassifier, one_hot, prepare

RIDGE = 1e-6


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class ExtremeLearningMachine(MetaClassifier):
    """Single hidden layer with fixed N(0, 1) input weights and biases, sigmoid
    units, and output weights from ``(H'H + 1e-6 I) beta = H'T``."""

    kind = "elm"
    magic = b"DSEL"

    def __init__(self, hidden_units: int = 100, seed: int = 0):
        super().__init__()
        if hidden_units < 1:
            raise ValueError(f"hidden_units must be >= 1, got {hidden_units}")
        self.hidden_units, self.seed = hidden_units, seed

    def hidden(self, X) -> np.ndarray:
        return sigmoid(np.asarray(X, dtype=np.float64) @ self.W_in + self.b_in)

    def fit(self, X, y, num_classes=None):
        X, y, c = prepare(X, y, num_classes)
        rng = Rng.for_key(self.seed, "elm")
        self.W_in = rng.normal_array((X.shape[1], self.hidden_units))
        self.b_in = rng.normal_array(self.hidden_units)
        H = self.hidden(X)
        T = one_hot(y, c)
        G = H.T @ H
        G[np.diag_indices_from(G)] += RIDGE
        self.beta = np.linalg.solve(G, H.T @ T)
        self.num_classes = c
        return self

    def decision(self, X):
        self._check_fitted()
        return self.hidden(X) @ self.beta

    def get_state(self):
        return ({"hidden_units": self.hidden_units, "seed": self.seed},
                {"W_in": self.W_in, "b_in": self.b_in, "beta": self.beta})

    def set_state(self, header, arrays):
        self.hidden_units, self.seed = header["hidden_units"], header["seed"]
        self.W_in, self.b_in, self.beta = arrays["W_in"], arrays["b_in"], arrays["beta"]
