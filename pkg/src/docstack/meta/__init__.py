"""Meta-classifiers for stacked generalisation, all with ``fit`` / ``predict``."""
from .bagging import BaggingSVM
from .base import MetaClassifier, NotFittedError, vote
from .elm import ExtremeLearningMachine
from .knn import KNearestNeighbors
from .linear import LinearRegression, Ridge
from .mlnn import MultilayerNet
from .svm import SVM

KINDS = ("linreg", "ridge", "knn", "svm_rbf", "bagging_svm", "elm", "mlnn")

CLASSES = {
    "linreg": LinearRegression,
    "ridge": Ridge,
    "knn": KNearestNeighbors,
    "svm_rbf": SVM,
    "bagging_svm": BaggingSVM,
    "elm": ExtremeLearningMachine,
    "mlnn": MultilayerNet,
}


def make(kind: str, **params) -> MetaClassifier:
    try:
        cls = CLASSES[kind]
    except KeyError:
        raise ValueError(f"unknown meta-classifier kind {kind!r}; choose from {KINDS}") from None
    return cls(**params)


def load(path, kind: str) -> MetaClassifier:
    return CLASSES[kind].load(path)


__all__ = [
    "KINDS", "CLASSES", "make", "load", "MetaClassifier", "NotFittedError", "vote", "BaggingSVM",
    "ExtremeLearningMachine", "KNearestNeighbors", "LinearRegression", "Ridge", "MultilayerNet", "SVM",
]
