from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..numerics import ops
from ..numerics.adam import Adam
from ..numerics.rng import Rng
from .checkpoint import ModelCheckpoint

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 25
    batch_size: int = 32
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    patience: int = 2
    factor: float = 0.5
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if not 0.0 < self.factor < 1.0:
            raise ValueError(f"decay factor must be in (0, 1), got {self.factor}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


class PlateauDecay:
    """Multiply the learning rate by ``factor`` after ``patience`` epochs without
    a strict improvement in validation accuracy; the wait counter then restarts."""

    def __init__(self, lr: float, patience: int, factor: float):
        self.lr = lr
        self.patience = patience
        self.factor = factor
        self.best = -np.inf
        self.wait = 0

    def step(self, val_acc: float) -> float:
        if val_acc > self.best:
            self.best = val_acc
            self.wait = 0
        else:
            self.wait += 1
            if self.wait >= self.patience:
                self.lr *= self.factor
                self.wait = 0
        return self.lr


def accuracy(model, x, y, batch_size: int = 128) -> float:
    if len(y) == 0:
        return 0.0
    return float((model.predict_proba(x, batch_size).argmax(axis=1) == y).mean())


def _check_labels(y, c, what):
    if len(y) == 0:
        raise TrainingError(f"{what} split is empty")
    if y.min() < 0 or y.max() >= c:
        raise TrainingError(f"{what} labels outside [0, {c})")


def train(model, train_set, val_set, cfg: TrainConfig, init: str = "random", metadata=None,
          on_epoch=None):
    """Mini-batch Adam on mean cross-entropy with plateau learning-rate decay.

    ``train_set`` / ``val_set`` expose ``x`` and ``y`` arrays. Returns the
    checkpoint of the best validation epoch and the per-epoch history rows
    ``{"epoch", "train_loss", "val_acc", "lr"}`` where ``lr`` is the rate used
    during that epoch.
    """
    c = model.desc.num_classes
    if model.dtype != np.dtype(cfg.dtype):
        model.params = {k: v.astype(cfg.dtype) for k, v in model.params.items()}
        model.dtype = np.dtype(cfg.dtype)
    _check_labels(train_set.y, c, "train")
    _check_labels(val_set.y, c, "validation")
    opt = Adam(model.params, cfg.alpha, cfg.beta1, cfg.beta2, cfg.epsilon)
    sched = PlateauDecay(cfg.alpha, cfg.patience, cfg.factor)
    drop_rng = Rng.for_key(cfg.seed, "dropout")
    n = len(train_set.y)
    history = []
    best_acc, best_params, best_epoch = -1.0, None, 0
    for epoch in range(1, cfg.epochs + 1):
        lr = sched.lr
        opt.lr = lr
        order = Rng.for_key(cfg.seed, f"shuffle/{epoch}").permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            xb, yb = train_set.x[idx], train_set.y[idx]
            logits = model.forward(xb, train=True, rng=drop_rng)
            loss = ops.cross_entropy(logits, yb)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss {loss} at epoch {epoch}, batch {b} (lr={lr:g})")
            total += loss * len(idx)
            grads = model.backward(ops.softmax_crossentropy_backward(ops.softmax(logits), yb))
            opt.step(model.params, grads)
        val_acc = accuracy(model, val_set.x, val_set.y)
        row = {"epoch": epoch, "train_loss": total / n, "val_acc": val_acc, "lr": lr}
        history.append(row)
        log.info("epoch %d loss %.4f val_acc %.4f lr %.2e", epoch, row["train_loss"], val_acc, lr)
        if val_acc > best_acc:
            best_acc, best_epoch = val_acc, epoch
            best_params = {k: v.copy() for k, v in model.params.items()}
        sched.step(val_acc)
        if on_epoch is not None:
            on_epoch(row)
    meta = dict(metadata or {})
    meta.update({"init": init, "epochs": cfg.epochs, "best_epoch": best_epoch,
                 "val_acc": best_acc, "train_config": cfg.to_dict()})
    model.params = best_params
    return ModelCheckpoint(model.desc, best_params, meta), history


def predict(model, dataset, batch_size: int = 128):
    """``(ids, probabilities)`` in dataset order, evaluated in float64."""
    if model.dtype != np.float64:
        model = model.astype(np.float64)
    if tuple(dataset.x.shape[1:]) != model.desc.input_shape:
        raise ops.ShapeError(f"dataset tensors {dataset.x.shape[1:]} vs model input {model.desc.input_shape}")
    return list(dataset.ids), model.predict_proba(dataset.x, batch_size)


def history_csv(history) -> str:
    lines = ["epoch,train_loss,val_acc,lr"]
    for r in history:
        lines.append(f"{r['epoch']},{r['train_loss']:.10g},{r['val_acc']:.10g},{r['lr']:.10g}")
    return "\n".join(lines) + "\n"
