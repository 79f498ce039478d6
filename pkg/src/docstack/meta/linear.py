"""Least-squares regression onto one-hot targets, classified by argmax."""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .base import MetaClassifier, one_hot, prepare

STABILIZER = 1e-10


def _augment(X):
    return np.hstack([X, np.ones((len(X), 1))])


def solve_normal_equations(X, Y, lam: float, penalize_bias: bool) -> np.ndarray:
    """Solve ``(A^T A + lam*P) W = A^T Y`` with ``A = [X, 1]``; ``P`` is the
    identity, optionally without its bias entry."""
    A = _augment(X)
    G = A.T @ A
    pen = np.full(A.shape[1], lam)
    if not penalize_bias:
        pen[-1] = 0.0
    G[np.diag_indices_from(G)] += pen
    try:
        W = scipy.linalg.solve(G, A.T @ Y, assume_a="sym")
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"normal equations are singular (lambda={lam:g})") from exc
    if not np.all(np.isfinite(W)):
        raise np.linalg.LinAlgError("normal-equations solution is not finite")
    return W


class LinearRegression(MetaClassifier):
    kind = "linreg"
    magic = b"DSLR"

    def fit(self, X, y, num_classes=None):
        X, y, c = prepare(X, y, num_classes)
        self.W = solve_normal_equations(X, one_hot(y, c), STABILIZER, penalize_bias=True)
        self.num_classes = c
        return self

    @property
    def weights(self):
        return self.W

    def decision(self, X):
        self._check_fitted()
        return _augment(np.asarray(X, dtype=np.float64)) @ self.W

    def get_state(self):
        return {}, {"W": self.W}

    def set_state(self, header, arrays):
        self.W = arrays["W"]


class Ridge(LinearRegression):
    """l2-penalised least squares; the bias is not penalised."""

    kind = "ridge"
    magic = b"DSRG"

    def __init__(self, lam: float = 1.0):
        super().__init__()
        if lam < 0:
            raise ValueError(f"ridge lambda must be >= 0, got {lam}")
        self.lam = lam

    def fit(self, X, y, num_classes=None):
        X, y, c = prepare(X, y, num_classes)
        self.W = solve_normal_equations(X, one_hot(y, c), self.lam, penalize_bias=False)
        self.num_classes = c
        return self

    def get_state(self):
        return {"lam": self.lam}, {"W": self.W}

    def set_state(self, header, arrays):
        self.lam = header["lam"]
        self.W = arrays["W"]
