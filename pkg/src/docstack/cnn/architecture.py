from __future__ import annotations

import json
from dataclasses import dataclass, field

LAYER_TYPES = {"conv", "relu", "maxpool", "flatten", "dense", "dropout", "softmax"}
PARAM_LAYERS = {"conv", "dense"}


@dataclass
class ArchitectureDescriptor:
    """Ordered layer list plus input shape and class count.

    Each layer is a plain dict with a ``type`` key; parameterised layers carry a
    unique ``name`` used for checkpoint keys and transfer matching.
    """

    input_shape: tuple
    num_classes: int
    layers: list = field(default_factory=list)

    def __post_init__(self):
        self.input_shape = tuple(int(d) for d in self.input_shape)
        self.validate()

    def validate(self):
        names = set()
        for layer in self.layers:
            kind = layer.get("type")
            if kind not in LAYER_TYPES:
                raise ValueError(f"unknown layer type {kind!r}")
            if kind in PARAM_LAYERS:
                name = layer.get("name")
                if not name or name in names:
                    raise ValueError(f"parameterised layer needs a unique name, got {name!r}")
                names.add(name)
        if not self.layers or self.layers[-1]["type"] != "softmax":
            raise ValueError("final layer must be softmax")
        dense = [l for l in self.layers if l["type"] == "dense"]
        if not dense or dense[-1]["out_dim"] != self.num_classes:
            raise ValueError(f"last dense layer must have out_dim == num_classes ({self.num_classes})")

    def param_shapes(self) -> dict:
        """``{"<layer>.weight": shape, "<layer>.bias": shape}`` in layer order."""
        shapes = {}
        shape = self.input_shape
        for layer in self.layers:
            kind = layer["type"]
            if kind == "conv":
                c, h, w = shape
                k, pad = layer.get("k", 3), layer.get("pad", 1)
                o = layer["out_channels"]
                shapes[layer["name"] + ".weight"] = (o, c, k, k)
                shapes[layer["name"] + ".bias"] = (o,)
                shape = (o, h + 2 * pad - k + 1, w + 2 * pad - k + 1)
            elif kind == "maxpool":
                c, h, w = shape
                win, st = layer.get("window", 2), layer.get("stride", 2)
                shape = (c, (h - win) // st + 1, (w - win) // st + 1)
            elif kind == "flatten":
                n = 1
                for d in shape:
                    n *= d
                shape = (n,)
            elif kind == "dense":
                shapes[layer["name"] + ".weight"] = (shape[0], layer["out_dim"])
                shapes[layer["name"] + ".bias"] = (layer["out_dim"],)
                shape = (layer["out_dim"],)
        return shapes

    def layer_names(self) -> list:
        return [l["name"] for l in self.layers if l["type"] in PARAM_LAYERS]

    def to_dict(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "num_classes": self.num_classes,
            "layers": [dict(l) for l in self.layers],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "ArchitectureDescriptor":
        return cls(tuple(d["input_shape"]), int(d["num_classes"]), [dict(l) for l in d["layers"]])

    @classmethod
    def from_json(cls, text: str) -> "ArchitectureDescriptor":
        return cls.from_dict(json.loads(text))

    def with_classes(self, num_classes: int) -> "ArchitectureDescriptor":
        layers = [dict(l) for l in self.layers]
        last = max(i for i, l in enumerate(layers) if l["type"] == "dense")
        layers[last]["out_dim"] = num_classes
        return ArchitectureDescriptor(self.input_shape, num_classes, layers)


def vgg_lite(num_classes: int, input_size: int = 32, channels: int = 1,
             widths=(8, 16, 32), hidden: int = 128, dropout: float = 0.5) -> ArchitectureDescriptor:
    """Stacked 3x3 conv pairs, each followed by 2x2 max-pool, then two dense layers."""
    layers = []
    for block, width in enumerate(widths, start=1):
        for i in (1, 2):
            layers.append({"type": "conv", "name": f"conv{block}_{i}", "out_channels": width, "k": 3, "pad": 1})
            layers.append({"type": "relu"})
        layers.append({"type": "maxpool", "window": 2, "stride": 2})
    layers += [
        {"type": "flatten"},
        {"type": "dense", "name": "fc1", "out_dim": hidden},
        {"type": "relu"},
        {"type": "dropout", "rate": dropout},
        {"type": "dense", "name": "fc2", "out_dim": num_classes},
        {"type": "softmax"},
    ]
    return ArchitectureDescriptor((channels, input_size, input_size), num_classes, layers)


def mlp(input_dim: int, hidden=(256, 256), num_classes: int = 16, dropout: float = 0.75) -> ArchitectureDescriptor:
    layers = []
    for i, width in enumerate(hidden, start=1):
        layers += [
            {"type": "dense", "name": f"fc{i}", "out_dim": width},
            {"type": "relu"},
            {"type": "dropout", "rate": dropout},
        ]
    layers += [
        {"type": "dense", "name": f"fc{len(hidden) + 1}", "out_dim": num_classes},
        {"type": "softmax"},
    ]
    return ArchitectureDescriptor((input_dim,), num_classes, layers)
