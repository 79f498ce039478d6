from __future__ import annotations

import numpy as np

from .. import container


class NotFittedError(RuntimeError):
    pass


class MetaClassifier:
    """Common surface: ``fit(X, y, num_classes)`` then ``predict(X)``.

    Argmax ties resolve to the smallest label index everywhere.
    """

    kind = "base"
    magic = b"DSM?"

    def __init__(self):
        self.num_classes = None

    @property
    def fitted(self) -> bool:
        return self.num_classes is not None

    def _check_fitted(self):
        if not self.fitted:
            raise NotFittedError(f"{self.kind}: predict called before fit")

    def fit(self, X, y, num_classes=None):
        raise NotImplementedError

    def decision(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return np.argmax(self.decision(np.asarray(X, dtype=np.float64)), axis=1)

    def get_state(self):
        """``(header, arrays)`` for serialisation."""
        raise NotImplementedError

    def set_state(self, header, arrays):
        raise NotImplementedError

    def save(self, path):
        self._check_fitted()
        header, arrays = self.get_state()
        header = {**header, "kind": self.kind, "num_classes": self.num_classes}
        container.write(path, self.magic, header, arrays)

    @classmethod
    def load(cls, path):
        header, arrays = container.read(path, cls.magic)
        obj = cls.__new__(cls)
        MetaClassifier.__init__(obj)
        obj.set_state(header, arrays)
        obj.num_classes = header["num_classes"]
        return obj


def prepare(X, y, num_classes):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"expected X (n, d) and y (n,), got {X.shape} and {y.shape}")
    if len(y) == 0:
        raise ValueError("cannot fit on an empty dataset")
    c = int(num_classes) if num_classes is not None else int(y.max()) + 1
    if y.min() < 0 or y.max() >= c:
        raise ValueError(f"labels must lie in [0, {c})")
    return X, y, c


def one_hot(y, c) -> np.ndarray:
    out = np.zeros((len(y), c))
    out[np.arange(len(y)), y] = 1.0
    return out


def vote(labels: np.ndarray, num_classes: int) -> np.ndarray:
    """Row-wise plurality over integer labels (n, m); ties go to the smallest label."""
    counts = np.zeros((labels.shape[0], num_classes), dtype=np.int64)
    for j in range(labels.shape[1]):
        counts[np.arange(labels.shape[0]), labels[:, j]] += 1
    return counts.argmax(axis=1)
