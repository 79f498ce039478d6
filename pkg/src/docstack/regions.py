"""The five page views and the input preprocessing applied to each.

Crop edges are ``floor(fraction * size + 0.5)`` (round half up). Resizing is
separable bilinear interpolation with the triangle filter widened by the
downscale factor, so reductions average over the source instead of
point-sampling it; for upscaling it is ordinary bilinear interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics.rng import Rng

VIEW_ORDER = ("holistic", "header", "footer", "left_body", "right_body")


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class RegionSpec:
    name: str
    rect: tuple  # (x0, y0, x1, y1) as fractions of the source
    size: int = 32

    def __post_init__(self):
        x0, y0, x1, y1 = self.rect
        if not (0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0):
            raise RegionError(f"{self.name}: invalid fractional rectangle {self.rect}")
        if self.name == "holistic" and tuple(self.rect) != (0.0, 0.0, 1.0, 1.0):
            raise RegionError("holistic view must cover the full image")


DEFAULT_GEOMETRY = {
    "holistic": (0.0, 0.0, 1.0, 1.0),
    "header": (0.0, 0.0, 1.0, 0.25),
    "footer": (0.0, 0.75, 1.0, 1.0),
    "left_body": (0.0, 0.25, 0.5, 0.75),
    "right_body": (0.5, 0.25, 1.0, 0.75),
}


def default_specs(size: int = 32, geometry=None) -> dict:
    geometry = geometry or DEFAULT_GEOMETRY
    return {name: RegionSpec(name, tuple(geometry[name]), size) for name in VIEW_ORDER}


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def crop_bounds(spec: RegionSpec, height: int, width: int):
    """Pixel ``(row0, row1, col0, col1)``, half-open."""
    x0, y0, x1, y1 = spec.rect
    r0, r1 = round_half_up(y0 * height), round_half_up(y1 * height)
    c0, c1 = round_half_up(x0 * width), round_half_up(x1 * width)
    if r1 - r0 < 2 or c1 - c0 < 2:
        raise RegionError(f"{spec.name}: crop {r1 - r0}x{c1 - c0} px is smaller than 2x2")
    return r0, r1, c0, c1


def resize_matrix(src: int, dst: int) -> np.ndarray:
    """(dst, src) row-stochastic interpolation weights."""
    scale = src / dst
    support = max(scale, 1.0)
    centers = (np.arange(dst) + 0.5) * scale - 0.5
    taps = np.arange(src)
    w = np.maximum(0.0, 1.0 - np.abs(taps[None, :] - centers[:, None]) / support)
    return w / w.sum(axis=1, keepdims=True)


def resize(img: np.ndarray, height: int, width: int) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    return resize_matrix(img.shape[0], height) @ img @ resize_matrix(img.shape[1], width).T


def extract_region(pixels: np.ndarray, spec: RegionSpec, channels: int = 1) -> np.ndarray:
    """Crop, scale to [0, 1] and resize to ``(channels, size, size)``."""
    r0, r1, c0, c1 = crop_bounds(spec, *pixels.shape)
    out = resize(pixels[r0:r1, c0:c1].astype(np.float64) / 255.0, spec.size, spec.size)
    return np.repeat(out[None], channels, axis=0)


@dataclass(frozen=True)
class Stats:
    view: str
    mean: float
    std: float

    @classmethod
    def fit(cls, view: str, batch: np.ndarray) -> "Stats":
        return cls(view, float(batch.mean()), float(batch.std()))

    def to_dict(self) -> dict:
        return {"view": self.view, "mean": self.mean, "std": self.std}


def standardize(batch: np.ndarray, stats: Stats, view: str) -> np.ndarray:
    if stats.view != view:
        raise RegionError(f"standardization stats belong to view {stats.view!r}, batch is {view!r}")
    out = (batch - stats.mean) / max(stats.std, 1e-6)
    if not np.all(np.isfinite(out)):
        raise RegionError(f"{view}: non-finite values after standardization")
    return out


@dataclass
class RegionDataset:
    """In-memory view tensors with labels and ids, in manifest order."""

    view: str
    x: np.ndarray
    y: np.ndarray
    ids: list

    def __len__(self):
        return len(self.ids)

    def batches(self, batch_size: int, seed: int | None = None):
        """Yield ``(x, y, ids)``; shuffled deterministically when ``seed`` is given."""
        n = len(self.ids)
        order = np.arange(n) if seed is None else Rng.for_key(seed, "batches/" + self.view).permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            yield self.x[idx], self.y[idx], [self.ids[i] for i in idx]


def view_tensors(images, spec: RegionSpec, channels: int = 1) -> np.ndarray:
    if not images:
        return np.zeros((0, channels, spec.size, spec.size))
    return np.stack([extract_region(im.pixels, spec, channels) for im in images])


def region_dataset(images, spec: RegionSpec, stats: Stats, channels: int = 1) -> RegionDataset:
    """Standardized view of ``images`` (a list of :class:`LabeledImage`)."""
    x = standardize(view_tensors(images, spec, channels), stats, spec.name)
    y = np.asarray([im.label for im in images], dtype=np.int64)
    return RegionDataset(spec.name, x, y, [im.id for im in images])
