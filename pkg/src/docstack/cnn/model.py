from __future__ import annotations

import numpy as np

from ..numerics import ops
from ..numerics.rng import Rng
from .architecture import ArchitectureDescriptor


def he_init(shape, fan_in: int, seed: int, key: str) -> np.ndarray:
    return Rng.for_key(seed, key).normal_array(shape) * np.sqrt(2.0 / fan_in)


def init_layer(desc: ArchitectureDescriptor, layer_name: str, seed: int) -> dict:
    """He-scaled weights and zero bias for one layer, seeded by (seed, layer name)."""
    shapes = desc.param_shapes()
    w_shape = shapes[layer_name + ".weight"]
    fan_in = int(np.prod(w_shape[1:])) if len(w_shape) == 4 else w_shape[0]
    return {
        layer_name + ".weight": he_init(w_shape, fan_in, seed, "init/" + layer_name),
        layer_name + ".bias": np.zeros(shapes[layer_name + ".bias"]),
    }


class Model:
    """Sequential network built from an :class:`ArchitectureDescriptor`.

    ``forward`` takes channel-first input and returns logits; the trailing
    softmax layer is applied by :meth:`predict_proba` and fused into the loss
    gradient during training. Image activations are held channel-last
    internally, so ``flatten`` orders features as (H, W, C).
    """

    def __init__(self, desc: ArchitectureDescriptor, params: dict, dtype=np.float64):
        expected = desc.param_shapes()
        if set(params) != set(expected):
            missing = sorted(set(expected) - set(params))
            extra = sorted(set(params) - set(expected))
            raise ops.ShapeError(f"parameter set mismatch: missing {missing}, unexpected {extra}")
        for name, shape in expected.items():
            if tuple(params[name].shape) != tuple(shape):
                raise ops.ShapeError(f"{name}: shape {params[name].shape}, descriptor wants {shape}")
        self.desc = desc
        self.dtype = np.dtype(dtype)
        self.params = {k: np.array(params[k], dtype=self.dtype) for k in expected}
        self._cache = None

    def astype(self, dtype) -> "Model":
        """Copy of this model computing in ``dtype``."""
        return Model(self.desc, self.params, dtype)

    def num_params(self) -> int:
        return sum(p.size for p in self.params.values())

    def forward(self, x: np.ndarray, train: bool = False, rng: Rng | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if tuple(x.shape[1:]) != self.desc.input_shape:
            raise ops.ShapeError(f"model expects input {self.desc.input_shape}, got {x.shape[1:]}")
        if x.ndim == 4:
            x = x.transpose(0, 2, 3, 1)
        cache = []
        first_conv = True
        for layer in self.desc.layers:
            kind = layer["type"]
            if kind == "conv":
                w = self.params[layer["name"] + ".weight"]
                b = self.params[layer["name"] + ".bias"]
                pad = layer.get("pad", 1)
                out, cols = ops.conv2d_nhwc_forward(x, w, b, 1, pad)
                cache.append((x.shape, cols, first_conv))
                first_conv = False
                x = out
            elif kind == "relu":
                cache.append(x)
                x = ops.relu(x)
            elif kind == "maxpool":
                out, idx = ops.maxpool2d_nhwc(x, layer.get("window", 2), layer.get("stride", 2))
                cache.append((x.shape, idx))
                x = out
            elif kind == "flatten":
                cache.append(x.shape)
                x = x.reshape(x.shape[0], -1)
            elif kind == "dense":
                cache.append(x)
                x = ops.dense_forward(x, self.params[layer["name"] + ".weight"],
                                      self.params[layer["name"] + ".bias"])
            elif kind == "dropout":
                rate = layer["rate"]
                if train and rate > 0:
                    if rng is None:
                        raise ValueError("train-mode dropout needs an rng")
                    mask = ((rng.uniform_array(x.shape) >= rate) / (1.0 - rate)).astype(self.dtype)
                    cache.append(mask)
                    x = x * mask
                else:
                    cache.append(None)
            elif kind == "softmax":
                cache.append(None)
        self._cache = cache
        return x

    def backward(self, grad: np.ndarray) -> dict:
        """Backpropagate d(loss)/d(logits) through the cached forward pass."""
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        grad = np.asarray(grad, dtype=self.dtype)
        grads = {}
        for layer, saved in zip(reversed(self.desc.layers), reversed(self._cache)):
            kind = layer["type"]
            if kind == "conv":
                x_shape, cols, is_first = saved
                w = self.params[layer["name"] + ".weight"]
                dx, dw, db = ops.conv2d_nhwc_backward(grad, x_shape, w, cols, 1, layer.get("pad", 1),
                                                      need_input_grad=not is_first)
                grads[layer["name"] + ".weight"] = dw
                grads[layer["name"] + ".bias"] = db
                grad = dx
                if grad is None:
                    break
            elif kind == "relu":
                grad = ops.relu_backward(grad, saved)
            elif kind == "maxpool":
                x_shape, idx = saved
                grad = ops.maxpool2d_backward(grad, idx, x_shape)
            elif kind == "flatten":
                grad = grad.reshape(saved)
            elif kind == "dense":
                dx, dw, db = ops.dense_backward(grad, saved, self.params[layer["name"] + ".weight"])
                grads[layer["name"] + ".weight"] = dw
                grads[layer["name"] + ".bias"] = db
                grad = dx
            elif kind == "dropout":
                if saved is not None:
                    grad = grad * saved
        self._cache = None
        return grads

    def predict_proba(self, x: np.ndarray, batch_size: int = 128) -> np.ndarray:
        out = []
        for start in range(0, len(x), batch_size):
            logits = self.forward(x[start:start + batch_size], train=False)
            out.append(ops.softmax(logits))
        self._cache = None
        if not out:
            return np.zeros((0, self.desc.num_classes))
        return np.concatenate(out, axis=0)


def build_model(desc: ArchitectureDescriptor, seed: int | None = None, checkpoint=None,
                dtype=np.float64) -> Model:
    """Random He init from ``seed``, or weights taken verbatim from ``checkpoint``."""
    if (seed is None) == (checkpoint is None):
        raise ValueError("build_model needs exactly one of seed or checkpoint")
    if checkpoint is not None:
        return Model(desc, {k: np.asarray(v) for k, v in checkpoint.weights.items()}, dtype)
    params = {}
    for name in desc.layer_names():
        params.update(init_layer(desc, name, seed))
    return Model(desc, params, dtype)
