from __future__ import annotations

import numpy as np

from ..cnn.architecture import ArchitectureDescriptor, mlp
from ..cnn.model import build_model, Model
from ..numerics import ops
from ..numerics.adam import Adam
from ..numerics.rng import Rng
from .base import MetaClassifier, prepare


class MultilayerNet(MetaClassifier):
    """dense(256)-relu-dropout-dense(256)-relu-dropout-dense(C), softmax output,
    trained with Adam on mean cross-entropy for a fixed number of epochs."""

    kind = "mlnn"
    magic = b"DSML"

    def __init__(self, hidden=(256, 256), dropout: float = 0.75, epochs: int = 150,
                 batch_size: int = 32, alpha: float = 1e-3, seed: int = 0):
        super().__init__()
        self.hidden, self.dropout = tuple(hidden), dropout
        self.epochs, self.batch_size, self.alpha, self.seed = epochs, batch_size, alpha, seed

    def fit(self, X, y, num_classes=None):
        X, y, c = prepare(X, y, num_classes)
        desc = mlp(X.shape[1], self.hidden, c, self.dropout)
        model = build_model(desc, seed=self.seed)
        opt = Adam(model.params, self.alpha)
        drop_rng = Rng.for_key(self.seed, "mlnn/dropout")
        n = len(X)
        self.loss_history = []
        for epoch in range(1, self.epochs + 1):
            order = Rng.for_key(self.seed, f"mlnn/shuffle/{epoch}").permutation(n)
            total = 0.0
            for s in range(0, n, self.batch_size):
                idx = order[s:s + self.batch_size]
                logits = model.forward(X[idx], train=True, rng=drop_rng)
                loss = ops.cross_entropy(logits, y[idx])
                if not np.isfinite(loss):
                    raise ops.NonFiniteError(f"mlnn: non-finite loss at epoch {epoch}")
                total += loss * len(idx)
                grads = model.backward(ops.softmax_crossentropy_backward(ops.softmax(logits), y[idx]))
                opt.step(model.params, grads)
            self.loss_history.append(total / n)
        self.model = model
        self.num_classes = c
        return self

    def decision(self, X):
        """Class probabilities (dropout off)."""
        self._check_fitted()
        return self.model.predict_proba(np.asarray(X, dtype=np.float64))

    def get_state(self):
        header = {"descriptor": self.model.desc.to_dict(), "epochs": self.epochs,
                  "batch_size": self.batch_size, "alpha": self.alpha, "seed": self.seed,
                  "dropout": self.dropout, "hidden": list(self.hidden)}
        return header, dict(self.model.params)

    def set_state(self, header, arrays):
        self.hidden, self.dropout = tuple(header["hidden"]), header["dropout"]
        self.epochs, self.batch_size = header["epochs"], header["batch_size"]
        self.alpha, self.seed = header["alpha"], header["seed"]
        self.model = Model(ArchitectureDescriptor.from_dict(header["descriptor"]), arrays)
