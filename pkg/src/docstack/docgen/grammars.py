"""Layout grammars: per-class ordered block generators with positional ranges.

Positions are fractions of the canvas; each ``(lo, hi)`` pair is sampled
uniformly per image. Header, body and footer bands deliberately carry
different statistics per class so that crops of the page are informative
on their own.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics.rng import Rng
from .render import PRIMITIVES


@dataclass(frozen=True)
class Block:
    kind: str
    left: tuple = (0.06, 0.1)
    top: tuple = (0.0, 0.0)
    right: tuple = (0.9, 0.94)
    bottom: tuple = (1.0, 1.0)
    p: float = 1.0
    params: dict = field(default_factory=dict)

    def place(self, rng: Rng, h: int, w: int):
        x0 = int(rng.uniform(*self.left) * w)
        y0 = int(rng.uniform(*self.top) * h)
        x1 = int(rng.uniform(*self.right) * w)
        y1 = int(rng.uniform(*self.bottom) * h)
        return x0, y0, max(x1, x0 + 2), max(y1, y0 + 2)


@dataclass(frozen=True)
class LayoutGrammar:
    name: str
    blocks: tuple

    def render(self, rng: Rng, h: int, w: int) -> np.ndarray:
        ink = np.zeros((h, w))
        for block in self.blocks:
            if block.p < 1.0 and rng.random() >= block.p:
                continue
            PRIMITIVES[block.kind](ink, rng, block.place(rng, h, w), block.params)
        return ink


def B(kind, left=(0.06, 0.1), top=(0.0, 0.0), right=(0.9, 0.94), bottom=(1.0, 1.0), p=1.0, **params):
    return Block(kind, left, top, right, bottom, p, params)


DOCUMENT_GRAMMARS = [
    LayoutGrammar("letter", (
        B("masthead", (0.35, 0.42), (0.03, 0.05), (0.58, 0.65), (0.08, 0.1), p=0.7, style="band"),
        B("text_lines", top=(0.11, 0.13), right=(0.45, 0.55), bottom=(0.2, 0.23), gap=(5, 7), min_len=0.4),
        B("paragraph", top=(0.3, 0.34), bottom=(0.62, 0.72), gap=(5, 7), para=(3, 6), indent=True),
        B("signature", (0.08, 0.12), (0.76, 0.79), (0.3, 0.4), (0.82, 0.86)),
        B("text_lines", top=(0.87, 0.89), right=(0.3, 0.4), bottom=(0.9, 0.93), p=0.6),
    )),
    LayoutGrammar("memo", (
        B("masthead", (0.05, 0.08), (0.03, 0.05), (0.3, 0.45), (0.08, 0.1), style="title"),
        B("text_lines", top=(0.11, 0.12), right=(0.5, 0.7), bottom=(0.2, 0.22), gap=(6, 8), min_len=0.5),
        B("rule", top=(0.23, 0.24), thick=2),
        B("paragraph", top=(0.27, 0.3), bottom=(0.65, 0.8), gap=(3, 4), para=(4, 8)),
        B("text_lines", top=(0.85, 0.88), right=(0.2, 0.3), bottom=(0.88, 0.9), p=0.5),
    )),
    LayoutGrammar("email", (
        B("text_lines", top=(0.02, 0.04), right=(0.55, 0.8), bottom=(0.18, 0.23), gap=(2, 3), thick=(1, 1),
          min_len=0.3, word=(2, 8)),
        B("rule", top=(0.24, 0.25)),
        B("paragraph", top=(0.27, 0.3), bottom=(0.55, 0.95), gap=(2, 4), thick=(1, 1), para=(2, 5),
          word=(2, 9)),
    )),
    LayoutGrammar("folder", (
        B("frame", (0.0, 0.05), (0.0, 0.02), (0.35, 0.5), (0.07, 0.1), thick=2),
        B("frame", (0.15, 0.25), (0.3, 0.38), (0.7, 0.85), (0.45, 0.55), thick=2),
        B("text_lines", (0.2, 0.28), (0.39, 0.4), (0.6, 0.7), (0.44, 0.46), thick=(2, 3), gap=(4, 6)),
        B("masthead", (0.1, 0.3), (0.8, 0.85), (0.5, 0.8), (0.86, 0.9), p=0.4, style="title"),
    )),
    LayoutGrammar("form", (
        B("masthead", (0.3, 0.35), (0.03, 0.06), (0.6, 0.7), (0.08, 0.1), style="title"),
        B("text_lines", top=(0.12, 0.14), right=(0.8, 0.9), bottom=(0.18, 0.22), gap=(4, 6), p=0.7),
        B("table", top=(0.25, 0.28), bottom=(0.68, 0.74), rows=(6, 10), cols=(2, 4), fill=0.5),
        B("boxes", top=(0.77, 0.79), bottom=(0.88, 0.92), per_row=(2, 3)),
        B("rule", (0.55, 0.6), (0.94, 0.95), (0.9, 0.94), p=0.6),
    )),
    LayoutGrammar("handwritten", (
        B("text_lines", top=(0.02, 0.04), right=(0.4, 0.6), bottom=(0.05, 0.07), p=0.4),
        B("handwriting", top=(0.08, 0.15), bottom=(0.7, 0.95), gap=(10, 16)),
    )),
    LayoutGrammar("invoice", (
        B("masthead", (0.55, 0.6), (0.03, 0.05), (0.88, 0.94), (0.1, 0.13), style="band", level=(0.4, 0.8)),
        B("text_lines", top=(0.04, 0.06), right=(0.35, 0.45), bottom=(0.18, 0.22), gap=(3, 5), min_len=0.5),
        B("table", top=(0.26, 0.3), bottom=(0.62, 0.72), rows=(8, 14), cols=(4, 5), rules="rows", fill=0.8),
        B("frame", (0.58, 0.62), (0.76, 0.78), (0.9, 0.94), (0.86, 0.9), thick=2),
        B("text_lines", top=(0.78, 0.8), right=(0.4, 0.5), bottom=(0.86, 0.9), gap=(3, 5)),
    )),
    LayoutGrammar("advertisement", (
        B("masthead", (0.05, 0.15), (0.03, 0.12), (0.7, 0.95), (0.1, 0.18), style="title"),
        B("image", (0.05, 0.3), (0.2, 0.35), (0.6, 0.95), (0.5, 0.7)),
        B("text_lines", top=(0.72, 0.78), bottom=(0.82, 0.9), thick=(3, 5), gap=(4, 8), align="center"),
        B("image", (0.6, 0.7), (0.8, 0.85), (0.85, 0.95), (0.9, 0.97), p=0.5),
    )),
    LayoutGrammar("budget", (
        B("masthead", (0.3, 0.35), (0.03, 0.05), (0.6, 0.7), (0.07, 0.09), style="title"),
        B("text_lines", top=(0.1, 0.12), bottom=(0.15, 0.17), align="center", p=0.6),
        B("table", top=(0.2, 0.24), bottom=(0.9, 0.95), rows=(14, 20), cols=(5, 7), rules="rows", fill=0.9),
    )),
    LayoutGrammar("news", (
        B("masthead", (0.03, 0.05), (0.02, 0.03), (0.95, 0.97), (0.08, 0.11), style="band"),
        B("columns", top=(0.14, 0.16), bottom=(0.92, 0.97), n=3, gap=(2, 3), thick=(1, 1), para=(5, 10)),
        B("image", (0.05, 0.36), (0.2, 0.4), (0.4, 0.64), (0.45, 0.6), p=0.5),
    )),
    LayoutGrammar("presentation", (
        B("masthead", (0.08, 0.12), (0.05, 0.08), (0.6, 0.85), (0.12, 0.15), style="title"),
        B("text_lines", (0.12, 0.18), (0.25, 0.3), (0.8, 0.9), (0.6, 0.8), thick=(2, 3), gap=(10, 14),
          min_len=0.4),
        B("image", (0.5, 0.6), (0.55, 0.65), (0.85, 0.95), (0.8, 0.9), p=0.4),
    )),
    LayoutGrammar("scientific_publication", (
        B("masthead", (0.15, 0.2), (0.04, 0.06), (0.8, 0.85), (0.08, 0.1), style="title"),
        B("text_lines", (0.25, 0.3), (0.12, 0.13), (0.7, 0.75), (0.18, 0.2), align="center", gap=(3, 4)),
        B("columns", top=(0.23, 0.25), bottom=(0.93, 0.97), n=2, gap=(2, 3), thick=(1, 1), para=(6, 12)),
    )),
    LayoutGrammar("questionnaire", (
        B("masthead", (0.25, 0.3), (0.03, 0.05), (0.7, 0.75), (0.07, 0.09), style="title"),
        B("boxes", top=(0.14, 0.2), bottom=(0.9, 0.95), per_row=(1, 2), gap=(7, 10)),
    )),
    LayoutGrammar("resume", (
        B("masthead", (0.3, 0.35), (0.03, 0.05), (0.65, 0.7), (0.08, 0.1), style="title"),
        B("text_lines", (0.25, 0.3), (0.11, 0.12), (0.7, 0.75), (0.14, 0.16), align="center"),
        B("rule", top=(0.2, 0.22), thick=2),
        B("text_lines", (0.25, 0.3), (0.24, 0.26), (0.85, 0.9), (0.45, 0.5), gap=(3, 5), min_len=0.3),
        B("rule", top=(0.5, 0.52), thick=2),
        B("text_lines", (0.25, 0.3), (0.54, 0.56), (0.85, 0.9), (0.88, 0.92), gap=(3, 5), min_len=0.3),
    )),
    LayoutGrammar("scientific_report", (
        B("masthead", (0.06, 0.1), (0.04, 0.06), (0.5, 0.7), (0.08, 0.1), style="title"),
        B("rule", top=(0.13, 0.15)),
        B("paragraph", top=(0.18, 0.2), bottom=(0.5, 0.6), gap=(3, 4), para=(5, 9), indent=True),
        B("image", (0.2, 0.25), (0.6, 0.62), (0.75, 0.8), (0.75, 0.8), p=0.6),
        B("paragraph", top=(0.82, 0.84), bottom=(0.93, 0.95), gap=(3, 4)),
    )),
    LayoutGrammar("specification", (
        B("table", top=(0.03, 0.05), bottom=(0.12, 0.15), rows=(2, 3), cols=(3, 4)),
        B("text_lines", (0.06, 0.08), (0.2, 0.22), (0.12, 0.14), (0.8, 0.85), gap=(4, 6), min_len=0.9,
          word=(2, 4)),
        B("paragraph", (0.16, 0.2), (0.2, 0.22), (0.9, 0.94), (0.8, 0.85), gap=(4, 6)),
        B("table", top=(0.86, 0.88), bottom=(0.95, 0.97), rows=(2, 3), cols=(2, 3)),
    )),
]

PRETEXT_GRAMMARS = [
    LayoutGrammar("hstripes", (B("stripes", (0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (1.0, 1.0), orient="h"),)),
    LayoutGrammar("vstripes", (B("stripes", (0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (1.0, 1.0), orient="v"),)),
    LayoutGrammar("diagonal", (B("stripes", (0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (1.0, 1.0), orient="d"),)),
    LayoutGrammar("checker", (B("checker", (0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (1.0, 1.0)),)),
    LayoutGrammar("blobs", (B("blobs", (0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (1.0, 1.0)),)),
    LayoutGrammar("noise", (B("texture", (0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (1.0, 1.0)),)),
]


def document_grammars(num_classes: int) -> list:
    if not 2 <= num_classes <= len(DOCUMENT_GRAMMARS):
        raise ValueError(f"class count must be in [2, {len(DOCUMENT_GRAMMARS)}], got {num_classes}")
    return DOCUMENT_GRAMMARS[:num_classes]


def pretext_grammars(num_classes: int) -> list:
    if not 2 <= num_classes <= len(PRETEXT_GRAMMARS):
        raise ValueError(f"pretext class count must be in [2, {len(PRETEXT_GRAMMARS)}], got {num_classes}")
    return PRETEXT_GRAMMARS[:num_classes]
