"""Weight transfer between checkpoints.

L1 carries a network trained on the pretext task into the holistic document
model; L2 carries the trained holistic model into each region model. Layers
are matched by (name, shape): a matching layer is copied whole, anything
else is re-initialised whole with He draws keyed by the plan seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .cnn.architecture import ArchitectureDescriptor
from .cnn.checkpoint import ModelCheckpoint, load_checkpoint
from .cnn.model import Model, init_layer
from .cnn.train import train

LEVELS = ("L1", "L2")


class TransferError(Exception):
    pass


@dataclass
class TransferPlan:
    level: str
    target: ArchitectureDescriptor
    actions: list = field(default_factory=list)  # [(layer, "copy" | "reinit")]
    seed: int = 0
    source_path: str | None = None
    source: ModelCheckpoint | None = field(default=None, repr=False)

    def lines(self) -> list:
        return [f"{name} -> {'copy' if act == 'copy' else f'reinit({self.seed})'}"
                for name, act in self.actions]

    def text(self) -> str:
        return f"level {self.level}\n" + "\n".join(self.lines()) + "\n"

    def to_metadata(self) -> dict:
        return {"level": self.level, "seed": self.seed, "source": self.source_path,
                "layers": self.lines()}

    def copied_fraction(self) -> float:
        shapes = self.target.param_shapes()
        total = sum(_numel(s) for s in shapes.values())
        copied = sum(_numel(shapes[f"{n}.{p}"]) for n, a in self.actions if a == "copy"
                     for p in ("weight", "bias"))
        return copied / total


def _numel(shape) -> int:
    n = 1
    for d in shape:
        n *= d
    return n


def plan_transfer(source: ModelCheckpoint, target: ArchitectureDescriptor, level: str,
                  seed: int = 0, source_path=None) -> TransferPlan:
    if level not in LEVELS:
        raise TransferError(f"transfer level must be one of {LEVELS}, got {level!r}")
    src_shapes = source.descriptor.param_shapes()
    tgt_shapes = target.param_shapes()
    classifier = target.layer_names()[-1]
    class_change = source.descriptor.num_classes != target.num_classes
    actions = []
    for name in target.layer_names():
        keys = (f"{name}.weight", f"{name}.bias")
        same = all(k in src_shapes and tuple(src_shapes[k]) == tuple(tgt_shapes[k]) for k in keys)
        if same and not (class_change and name == classifier):
            actions.append((name, "copy"))
        else:
            actions.append((name, "reinit"))
    if not any(a == "copy" for _, a in actions):
        raise TransferError("no layer of the target matches the source by name and shape")
    return TransferPlan(level, target, actions, seed,
                        str(source_path) if source_path is not None else None, source)


def apply_transfer(plan: TransferPlan, dtype="float64") -> Model:
    """Build the target model; its ``transfer`` metadata is ``plan.to_metadata()``."""
    source = plan.source
    if source is None:
        if plan.source_path is None:
            raise TransferError("plan has neither a source checkpoint nor a source path")
        try:
            source = load_checkpoint(plan.source_path)
        except OSError as exc:
            raise TransferError(f"cannot read source checkpoint {plan.source_path}: {exc}") from exc
    params = {}
    for name, action in plan.actions:
        if action == "copy":
            for p in ("weight", "bias"):
                params[f"{name}.{p}"] = source.weights[f"{name}.{p}"].copy()
        else:
            params.update(init_layer(plan.target, name, plan.seed))
    return Model(plan.target, params, dtype)


def epochs_to_target(history, target: float):
    """First epoch whose validation accuracy reaches ``target``; None if never."""
    for row in history:
        if row["val_acc"] >= target:
            return row["epoch"]
    return None


def convergence_probe(target_accuracy: float, model: Model, train_set, val_set, cfg,
                      init: str = "random"):
    """Train ``model`` and report ``(epochs_to_target, history)``."""
    _, history = train(model, train_set, val_set, cfg, init=init)
    return epochs_to_target(history, target_accuracy), history


def source_unchanged(path, digest_before: str) -> bool:
    import hashlib
    return hashlib.sha256(Path(path).read_bytes()).hexdigest() == digest_before
