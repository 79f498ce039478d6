from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import container
from .architecture import ArchitectureDescriptor

MAGIC = b"DSCK"
INIT_TAGS = ("random", "L1", "L2")


@dataclass
class ModelCheckpoint:
    """Descriptor, float32 weights and training metadata.

    ``metadata`` always carries ``init`` (one of ``random``, ``L1``, ``L2``),
    ``epochs`` and ``val_acc``; transfer plans are stored under ``transfer``.
    """

    descriptor: ArchitectureDescriptor
    weights: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = {k: np.asarray(v, dtype=np.float32) for k, v in self.weights.items()}
        shapes = self.descriptor.param_shapes()
        if set(shapes) != set(self.weights):
            raise ValueError(
                f"checkpoint weights {sorted(self.weights)} do not match descriptor {sorted(shapes)}"
            )
        for name, shape in shapes.items():
            if self.weights[name].shape != tuple(shape):
                raise ValueError(f"{name}: weight shape {self.weights[name].shape} != {shape}")
        self.metadata.setdefault("init", "random")
        if self.metadata["init"] not in INIT_TAGS:
            raise ValueError(f"init tag must be one of {INIT_TAGS}")

    @classmethod
    def from_model(cls, model, **metadata) -> "ModelCheckpoint":
        return cls(model.desc, {k: v.copy() for k, v in model.params.items()}, dict(metadata))


def save_checkpoint(ckpt: ModelCheckpoint, path) -> None:
    header = {"descriptor": ckpt.descriptor.to_dict(), "metadata": ckpt.metadata}
    names = list(ckpt.descriptor.param_shapes())
    container.write(path, MAGIC, header, {n: ckpt.weights[n] for n in names})


def load_checkpoint(path) -> ModelCheckpoint:
    header, arrays = container.read(path, MAGIC)
    desc = ArchitectureDescriptor.from_dict(header["descriptor"])
    return ModelCheckpoint(desc, arrays, header["metadata"])
