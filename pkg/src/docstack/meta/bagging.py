from __future__ import annotations

import numpy as np

from ..numerics.rng import Rng
from .base import MetaClassifier, prepare, vote
from .svm import SVM


class BaggingSVM(MetaClassifier):
    """Plurality vote over SVMs fit on bootstrap resamples.

    Bag ``b`` draws ``bag_size`` indices with replacement from
    ``Rng.for_key(seed, "bag/<b>")``. ``bootstrap=False`` uses the full data in
    order for every bag (a test hook).
    """

    kind = "bagging_svm"
    magic = b"DSBG"

    def __init__(self, n_bags: int = 30, bag_size: int = 7500, seed: int = 0, C: float = 1.0,
                 gamma=None, bootstrap: bool = True):
        super().__init__()
        if n_bags < 1:
            raise ValueError(f"n_bags must be >= 1, got {n_bags}")
        self.n_bags, self.bag_size, self.seed = n_bags, bag_size, seed
        self.C, self.gamma, self.bootstrap = C, gamma, bootstrap

    def bag_indices(self, n: int, b: int) -> np.ndarray:
        if not self.bootstrap:
            return np.arange(n)
        return Rng.for_key(self.seed, f"bag/{b}").integers_array(n, min(self.bag_size, n))

    def fit(self, X, y, num_classes=None):
        X, y, c = prepare(X, y, num_classes)
        self.members = []
        for b in range(self.n_bags):
            idx = self.bag_indices(len(X), b)
            try:
                self.members.append(SVM(self.C, self.gamma).fit(X[idx], y[idx], c))
            except Exception as exc:
                raise RuntimeError(f"bagging member {b} failed: {exc}") from exc
        self.num_classes = c
        return self

    def member_predictions(self, X) -> np.ndarray:
        return np.stack([m.predict(X) for m in self.members], axis=1)

    def decision(self, X):
        """Vote counts per class."""
        self._check_fitted()
        labels = self.member_predictions(X)
        counts = np.zeros((len(labels), self.num_classes))
        for j in range(labels.shape[1]):
            counts[np.arange(len(labels)), labels[:, j]] += 1
        return counts

    def predict(self, X):
        self._check_fitted()
        return vote(self.member_predictions(np.asarray(X, dtype=np.float64)), self.num_classes)

    def get_state(self):
        header = {"n_bags": self.n_bags, "bag_size": self.bag_size, "seed": self.seed,
                  "C": self.C, "members": []}
        arrays = {}
        for b, m in enumerate(self.members):
            header["members"].append({"gamma": m.gamma_, "C": m.C, "tol": m.tol})
            arrays[f"{b}.X"], arrays[f"{b}.coef"], arrays[f"{b}.rho"] = m.X, m.coef, m.rho
        return header, arrays

    def set_state(self, header, arrays):
        self.n_bags, self.bag_size, self.seed = header["n_bags"], header["bag_size"], header["seed"]
        self.C, self.gamma, self.bootstrap = header["C"], None, True
        self.members = []
        for b, mh in enumerate(header["members"]):
            m = SVM.__new__(SVM)
            MetaClassifier.__init__(m)
            m.set_state(mh, {"X": arrays[f"{b}.X"], "coef": arrays[f"{b}.coef"], "rho": arrays[f"{b}.rho"]})
            m.num_classes = header["num_classes"]
            self.members.append(m)
