"""Meta-features from base-model predictions, and the stacking protocol.

Meta-classifiers are fit on validation-split meta-features and applied to
test-split meta-features. Fitting and prediction never see test labels;
scoring is a separate step over the frozen predictions.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import meta
from .regions import VIEW_ORDER

BLOCK_TOL = 1e-5


class StackingError(ValueError):
    pass


class LeakageError(StackingError):
    pass


@dataclass
class PredictionTable:
    model: str
    split: str
    ids: list
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.shape[0] != len(self.ids):
            raise StackingError(f"{self.model}/{self.split}: {len(self.ids)} ids, {self.probs.shape[0]} rows")

    @property
    def num_classes(self) -> int:
        return self.probs.shape[1]

    def lookup(self) -> dict:
        return {i: row for i, row in zip(self.ids, self.probs)}


@dataclass
class MetaFeatureSet:
    """Rows of ``Q_holistic ^ Q_header ^ Q_footer ^ Q_left ^ Q_right``, ordered by id."""

    ids: list
    X: np.ndarray
    y: np.ndarray | None
    num_classes: int
    order: tuple = VIEW_ORDER


def write_tables(path, tables) -> None:
    """CSV ``id,split,model,p0,...,p{C-1}``; values written with 17 significant digits."""
    tables = list(tables)
    c = tables[0].num_classes
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "split", "model"] + [f"p{k}" for k in range(c)])
    for t in tables:
        for i, row in zip(t.ids, t.probs):
            w.writerow([i, t.split, t.model] + [f"{v:.17g}" for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_tables(path) -> dict:
    """``{(model, split): PredictionTable}`` from one predictions CSV."""
    rows = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["id", "split", "model"]:
            raise StackingError(f"{path}: bad prediction table header {header[:3]}")
        for rec in reader:
            key = (rec[2], rec[1])
            rows.setdefault(key, ([], []))
            rows[key][0].append(rec[0])
            rows[key][1].append([float(v) for v in rec[3:]])
    return {k: PredictionTable(k[0], k[1], ids, np.asarray(p)) for k, (ids, p) in rows.items()}


def _check_tables(tables: dict):
    names = set(tables)
    if names != set(VIEW_ORDER):
        raise StackingError(f"need exactly the models {VIEW_ORDER}, got {sorted(names)}")
    ref = set(tables[VIEW_ORDER[0]].ids)
    for name in VIEW_ORDER:
        t = tables[name]
        if len(set(t.ids)) != len(t.ids):
            raise StackingError(f"{name}: duplicate ids in prediction table")
        if set(t.ids) != ref:
            diff = sorted(set(t.ids) ^ ref)[:5]
            raise StackingError(f"{name}: id set differs from {VIEW_ORDER[0]} (e.g. {diff})")
    widths = {tables[n].num_classes for n in VIEW_ORDER}
    if len(widths) != 1:
        raise StackingError(f"prediction vectors have differing lengths {sorted(widths)}")


def build_meta_features(tables: dict, labels: dict | None = None) -> MetaFeatureSet:
    """Join the five tables of one split on id and concatenate in the fixed view order.

    ``labels`` maps id -> class; pass None for the split being predicted.
    """
    _check_tables(tables)
    ids = sorted(tables[VIEW_ORDER[0]].ids)
    c = tables[VIEW_ORDER[0]].num_classes
    blocks = []
    for name in VIEW_ORDER:
        look = tables[name].lookup()
        blocks.append(np.stack([look[i] for i in ids]))
    X = np.concatenate(blocks, axis=1)
    check_meta_features(X, c, len(VIEW_ORDER))
    y = None if labels is None else np.asarray([labels[i] for i in ids], dtype=np.int64)
    return MetaFeatureSet(ids, X, y, c)


def check_meta_features(X: np.ndarray, c: int, n: int) -> None:
    if X.ndim != 2 or X.shape[1] != c * n:
        raise StackingError(f"meta-features must have length c*n = {c * n}, got shape {X.shape}")
    sums = X.reshape(len(X), n, c).sum(axis=2)
    bad = np.abs(sums - 1.0) > BLOCK_TOL
    if bad.any():
        r, b = np.argwhere(bad)[0]
        raise StackingError(f"row {r}, block {b}: probabilities sum to {sums[r, b]!r}, not 1")


def check_disjoint(val: MetaFeatureSet, test: MetaFeatureSet) -> None:
    overlap = sorted(set(val.ids) & set(test.ids))
    if overlap:
        raise LeakageError(f"{len(overlap)} id(s) in both validation and test: {overlap[:10]}")


@dataclass(frozen=True)
class MetaSpec:
    name: str
    kind: str
    params: dict


def default_specs(n_val: int, seed: int = 0, knn_k=(32, 64, 128), ridge_lambda=1.0, svm_c=1.0,
                  svm_gamma=None, n_bags=30, bag_size=7500, elm_hidden=100, mlnn_epochs=150,
                  mlnn_hidden=(256, 256), mlnn_dropout=0.75, kinds=meta.KINDS) -> list:
    """One spec per requested kind; kNN expands to one spec per distinct clipped k."""
    specs = []
    for kind in kinds:
        if kind == "linreg":
            specs.append(MetaSpec("linreg", kind, {}))
        elif kind == "ridge":
            specs.append(MetaSpec("ridge", kind, {"lam": ridge_lambda}))
        elif kind == "knn":
            for kk in dict.fromkeys(min(k, n_val) for k in knn_k):
                specs.append(MetaSpec(f"knn_k{kk}", kind, {"k": kk}))
        elif kind == "svm_rbf":
            specs.append(MetaSpec("svm_rbf", kind, {"C": svm_c, "gamma": svm_gamma}))
        elif kind == "bagging_svm":
            specs.append(MetaSpec("bagging_svm", kind, {"n_bags": n_bags, "bag_size": min(bag_size, n_val),
                                                        "seed": seed, "C": svm_c, "gamma": svm_gamma}))
        elif kind == "elm":
            specs.append(MetaSpec("elm", kind, {"hidden_units": elm_hidden, "seed": seed}))
        elif kind == "mlnn":
            specs.append(MetaSpec("mlnn", kind, {"epochs": mlnn_epochs, "hidden": tuple(mlnn_hidden),
                                                 "dropout": mlnn_dropout, "seed": seed}))
        else:
            raise StackingError(f"unknown meta-classifier kind {kind!r}")
    return specs


def run_stack(val: MetaFeatureSet, test: MetaFeatureSet, specs, model_dir=None) -> dict:
    """Fit each spec on ``val`` and predict ``test``. Returns ``{name: labels}``
    in ``test.ids`` order; fitted models are saved under ``model_dir`` if given."""
    if val.y is None:
        raise StackingError("validation meta-features need labels to fit meta-classifiers")
    check_disjoint(val, test)
    out = {}
    for spec in specs:
        clf = meta.make(spec.kind, **spec.params)
        clf.fit(val.X, val.y, val.num_classes)
        out[spec.name] = clf.predict(test.X)
        if model_dir is not None:
            clf.save(Path(model_dir) / f"{spec.name}.bin")
    return out


def majority_vote(tables: dict) -> tuple:
    """``(ids, labels)``: plurality of the five argmaxes; ties go to the smallest label."""
    _check_tables(tables)
    ids = sorted(tables[VIEW_ORDER[0]].ids)
    probs = np.stack([np.stack([tables[n].lookup()[i] for i in ids]) for n in VIEW_ORDER], axis=1)
    return ids, meta.vote(probs.argmax(axis=2), probs.shape[2])


def accuracy(ids, predictions, labels: dict) -> float:
    y = np.asarray([labels[i] for i in ids])
    return float((np.asarray(predictions) == y).mean())


def write_predictions(path, ids, labels) -> None:
    lines = ["id,prediction"] + [f"{i},{int(p)}" for i, p in zip(ids, labels)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_predictions(path) -> tuple:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [r["id"] for r in rows], np.asarray([int(r["prediction"]) for r in rows])
