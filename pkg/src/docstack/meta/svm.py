"""RBF-kernel SVM trained by sequential minimal optimisation.

The binary solver follows the standard dual formulation
``min 1/2 a'Qa - e'a  s.t. 0 <= a <= C, y'a = 0`` with ``Q = (y y') * K``,
choosing each working pair by maximal violation for ``i`` and the
second-order gain for ``j`` (Fan, Chen & Lin, 2005). Multi-class problems are
split one-vs-rest and decided by the largest decision value.
"""
from __future__ import annotations

import logging

import numpy as np

from .base import MetaClassifier, prepare

log = logging.getLogger(__name__)

TAU = 1e-12


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    d2 = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-4, max_iter: int = 100000):
    """Solve the binary dual. Returns ``(alpha, rho, iterations)``; decision is
    ``sum_i alpha_i y_i K(x_i, x) - rho``."""
    n = len(y)
    y = y.astype(np.float64)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * G
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        gmax = score[i]
        gmin = np.min(np.where(low, score, np.inf))
        if gmax - gmin < tol:
            break
        b = gmax - score
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        gain = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(gain))
        it += 1

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(Q[i, i] + Q[j, j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = max(Q[i, i] + Q[j, j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        G += Q[i] * (ni - ai) + Q[j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
    else:
        log.warning("SMO stopped at max_iter=%d before reaching tol=%g", max_iter, tol)
    return alpha, _rho(alpha, y, G, C), it


def _rho(alpha, y, G, C):
    yG = y * G
    upper = alpha >= C
    lower = alpha <= 0
    free = ~upper & ~lower
    if free.any():
        return float(yG[free].mean())
    ub_mask = (upper & (y < 0)) | (lower & (y > 0))
    lb_mask = (upper & (y > 0)) | (lower & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)


def kkt_violation(alpha, y, f, C) -> float:
    """Largest KKT violation of a binary solution given training decisions ``f``."""
    m = y * f
    v = np.where(alpha <= 0, np.maximum(0.0, 1.0 - m),
                 np.where(alpha >= C, np.maximum(0.0, m - 1.0), np.abs(m - 1.0)))
    return float(v.max()) if len(v) else 0.0


class SVM(MetaClassifier):
    """One-vs-rest RBF SVM. ``gamma=None`` means ``1 / (d * var(X))``."""

    kind = "svm_rbf"
    magic = b"DSSV"

    def __init__(self, C: float = 1.0, gamma: float | None = None, tol: float = 1e-4):
        super().__init__()
        if C <= 0:
            raise ValueError(f"C must be > 0, got {C}")
        if gamma is not None and gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {gamma}")
        self.C, self.gamma, self.tol = C, gamma, tol
        self.report = []

    def fit(self, X, y, num_classes=None):
        X, y, c = prepare(X, y, num_classes)
        var = X.var()
        self.gamma_ = self.gamma if self.gamma is not None else (
            1.0 / (X.shape[1] * var) if var > 0 else 1.0)
        K = rbf_kernel(X, X, self.gamma_)
        self.X = X
        self.coef = np.zeros((c, len(X)))
        self.rho = np.zeros(c)
        self.alpha = np.zeros((c, len(X)))
        self.report = []
        for k in range(c):
            yk = np.where(y == k, 1.0, -1.0)
            if np.all(yk > 0) or np.all(yk < 0):
                self.rho[k] = -yk[0]
                self.report.append(f"class {k}: one-sided subproblem, constant decision {yk[0]:+.0f}")
                continue
            a, rho, iters = smo(K, yk, self.C, self.tol)
            self.alpha[k] = a
            self.coef[k] = a * yk
            self.rho[k] = rho
            log.debug("svm class %d: %d iterations, %d SVs", k, iters, int((a > 0).sum()))
        self.num_classes = c
        self._y = y
        return self

    def decision(self, X):
        self._check_fitted()
        K = rbf_kernel(np.asarray(X, dtype=np.float64), self.X, self.gamma_)
        return K @ self.coef.T - self.rho

    def kkt_violations(self) -> np.ndarray:
        """Per-class max KKT violation on the training set."""
        f = self.decision(self.X)
        out = []
        for k in range(self.num_classes):
            yk = np.where(self._y == k, 1.0, -1.0)
            out.append(kkt_violation(self.alpha[k], yk, f[:, k], self.C) if self.coef[k].any() else 0.0)
        return np.asarray(out)

    def get_state(self):
        return ({"C": self.C, "gamma": self.gamma_, "tol": self.tol},
                {"X": self.X, "coef": self.coef, "rho": self.rho})

    def set_state(self, header, arrays):
        self.C, self.gamma_, self.tol = header["C"], header["gamma"], header["tol"]
        self.gamma = self.gamma_
        self.X, self.coef, self.rho = arrays["X"], arrays["coef"], arrays["rho"]
        self.report = []
