"""Pipeline configuration: dotted ``section.key = value`` pairs over documented defaults."""
from __future__ import annotations

from pathlib import Path

from .. import kvconfig
from ..kvconfig import ConfigError
from ..numerics.rng import derive_seed
from ..regions import DEFAULT_GEOMETRY, RegionSpec

# key: (default, help)
DEFAULTS = {
    "seed": ("42", "master seed; every stage seed is derived from it"),
    "corpus.classes": ("8", "document classes C (2-16)"),
    "corpus.train": ("2000", "training images"),
    "corpus.validation": ("250", "validation images (meta-classifier training set)"),
    "corpus.test": ("250", "test images"),
    "corpus.height": ("256", "canvas height in pixels"),
    "corpus.width": ("192", "canvas width in pixels"),
    "corpus.atypical": ("0.3", "probability that a layout cell is borrowed from another class"),
    "pretext.classes": ("6", "pretext texture classes (2-6)"),
    "pretext.train": ("1000", "pretext training images"),
    "pretext.validation": ("100", "pretext validation images"),
    "pretext.test": ("100", "pretext test images"),
    "pretext.epochs": ("5", "pretext training epochs"),
    "holistic.epochs": ("25", "holistic training epochs"),
    "region.epochs": ("4", "region fine-tuning epochs"),
    "train.batch_size": ("32", "mini-batch size for every CNN"),
    "train.alpha": ("0.001", "Adam step size"),
    "train.beta1": ("0.9", "Adam beta1"),
    "train.beta2": ("0.999", "Adam beta2"),
    "train.epsilon": ("1e-8", "Adam epsilon"),
    "train.patience": ("2", "epochs without validation gain before the rate decays"),
    "train.factor": ("0.5", "learning-rate decay factor"),
    "train.dtype": ("float32", "training arithmetic (float32 or float64)"),
    "arch.input_size": ("32", "network input side length"),
    "arch.widths": ("8,16,32", "conv widths of the three stages"),
    "arch.hidden": ("128", "hidden dense units"),
    "arch.dropout": ("0.5", "dropout before the classifier"),
    "regions.header": (",".join(map(str, DEFAULT_GEOMETRY["header"])), "header rectangle left,top,right,bottom"),
    "regions.footer": (",".join(map(str, DEFAULT_GEOMETRY["footer"])), "footer rectangle"),
    "regions.left_body": (",".join(map(str, DEFAULT_GEOMETRY["left_body"])), "left body rectangle"),
    "regions.right_body": (",".join(map(str, DEFAULT_GEOMETRY["right_body"])), "right body rectangle"),
    "transfer.l1": ("true", "initialise the holistic model from the pretext model"),
    "transfer.l2": ("true", "initialise region models from the holistic model"),
    "probe.enabled": ("true", "run-all includes the convergence probe"),
    "probe.epochs": ("8", "epoch budget of the random-init probe baselines"),
    "probe.fraction": ("0.9", "target = fraction of the random model's final accuracy"),
    "meta.kinds": ("linreg,ridge,knn,svm_rbf,bagging_svm,elm,mlnn", "meta-classifiers to stack"),
    "meta.knn_k": ("32,64,128", "kNN neighbour counts (clipped to the validation size)"),
    "meta.ridge_lambda": ("1.0", "ridge penalty"),
    "meta.svm_c": ("1.0", "SVM box constraint"),
    "meta.svm_gamma": ("auto", "RBF gamma; auto = 1/(d*var(X))"),
    "meta.bagging_bags": ("30", "bagged SVMs"),
    "meta.bagging_size": ("7500", "bag size (clipped to the validation size)"),
    "meta.elm_hidden": ("100", "ELM hidden units"),
    "meta.mlnn_hidden": ("256,256", "MLNN hidden widths"),
    "meta.mlnn_dropout": ("0.75", "MLNN dropout rate"),
    "meta.mlnn_epochs": ("150", "MLNN training epochs"),
}

_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}


class PipelineConfig:
    """Resolved string values with typed accessors. Unknown keys are rejected."""

    def __init__(self, values: dict | None = None):
        self.values = {k: v for k, (v, _) in DEFAULTS.items()}
        self.update(values or {})

    def update(self, values: dict, source: str = "override"):
        for k, v in values.items():
            if k not in DEFAULTS:
                raise ConfigError(f"{source}: unknown key {k!r}")
            self.values[k] = str(v).strip()
        return self

    @classmethod
    def load(cls, path=None, overrides=(), seed=None) -> "PipelineConfig":
        cfg = cls()
        if path is not None:
            raw = kvconfig.load(path)
            cfg.update(raw, str(path))
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            k, v = item.split("=", 1)
            cfg.update({k.strip(): v}, "--set")
        if seed is not None:
            cfg.update({"seed": str(seed)}, "--seed")
        cfg.validate()
        return cfg

    def text(self) -> str:
        return kvconfig.dump(self.values)

    def save(self, path) -> None:
        Path(path).write_text(self.text(), encoding="utf-8")

    def _typed(self, key, conv, what):
        try:
            return conv(self.values[key])
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{key} = {self.values.get(key)!r} is not {what}") from exc

    def int(self, key) -> int:
        return self._typed(key, int, "an integer")

    def float(self, key) -> float:
        return self._typed(key, float, "a number")

    def bool(self, key) -> bool:
        return self._typed(key, lambda v: _BOOL[v.lower()], "a boolean")

    def str(self, key) -> str:
        return self.values[key]

    def ints(self, key) -> tuple:
        return self._typed(key, lambda v: tuple(int(p) for p in v.split(",")), "a comma list of integers")

    def floats(self, key) -> tuple:
        return self._typed(key, lambda v: tuple(float(p) for p in v.split(",")), "a comma list of numbers")

    def words(self, key) -> tuple:
        return tuple(p.strip() for p in self.values[key].split(",") if p.strip())

    def section(self, prefix: str) -> dict:
        return {k: v for k, v in self.values.items() if k.startswith(prefix + ".")}

    def seed_for(self, key: str) -> int:
        return derive_seed(self.int("seed") & (2**64 - 1), key)

    def region_specs(self) -> dict:
        size = self.int("arch.input_size")
        specs = {"holistic": RegionSpec("holistic", (0.0, 0.0, 1.0, 1.0), size)}
        for name in ("header", "footer", "left_body", "right_body"):
            rect = self.floats(f"regions.{name}")
            if len(rect) != 4:
                raise ConfigError(f"regions.{name} needs four numbers, got {len(rect)}")
            specs[name] = RegionSpec(name, rect, size)
        return specs

    def validate(self) -> None:
        from ..meta import KINDS
        for key in ("corpus.classes", "corpus.train", "corpus.validation", "corpus.test", "pretext.epochs",
                    "holistic.epochs", "region.epochs", "train.batch_size", "probe.epochs", "seed"):
            self.int(key)
        for key in ("train.alpha", "probe.fraction", "meta.ridge_lambda", "meta.svm_c", "corpus.atypical"):
            self.float(key)
        for key in ("transfer.l1", "transfer.l2", "probe.enabled"):
            self.bool(key)
        bad = [k for k in self.words("meta.kinds") if k not in KINDS]
        if bad:
            raise ConfigError(f"meta.kinds: unknown kinds {bad}; choose from {KINDS}")
        if self.str("train.dtype") not in ("float32", "float64"):
            raise ConfigError("train.dtype must be float32 or float64")
        self.region_specs()


def help_text() -> str:
    width = max(len(k) for k in DEFAULTS)
    return "\n".join(f"  {k:<{width}} = {v:<20} {h}" for k, (v, h) in DEFAULTS.items())
