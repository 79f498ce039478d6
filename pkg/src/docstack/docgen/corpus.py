from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .. import kvconfig
from ..numerics.rng import Rng
from . import pgm
from .grammars import document_grammars, pretext_grammars

SPLITS = ("train", "validation", "test")


class CorpusError(Exception):
    pass


@dataclass
class CorpusConfig:
    """Corpus shape. ``kind`` is ``document`` or ``pretext``."""

    kind: str = "document"
    classes: int = 8
    height: int = 256
    width: int = 192
    train: int = 2000
    validation: int = 250
    test: int = 250
    seed: int = 42
    atypical: float = 0.3

    def counts(self) -> dict:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise kvconfig.ConfigError(f"unknown corpus keys: {sorted(unknown)}")
        conv = {"kind": str, "atypical": float}
        return cls(**{k: conv.get(k, int)(v) for k, v in d.items()})

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ManifestRow:
    id: str
    path: str
    label: int
    split: str


@dataclass(frozen=True)
class LabeledImage:
    id: str
    pixels: np.ndarray
    label: int
    split: str


def _degrade(ink: np.ndarray, rng: Rng) -> np.ndarray:
    """Page shift, ink/paper tone, sensor noise and speckle; returns uint8 gray."""
    h, w = ink.shape
    dy, dx = rng.randint(-6, 6), rng.randint(-6, 6)
    shifted = np.zeros_like(ink)
    ys, yd = (slice(0, h - dy), slice(dy, h)) if dy >= 0 else (slice(-dy, h), slice(0, h + dy))
    xs, xd = (slice(0, w - dx), slice(dx, w)) if dx >= 0 else (slice(-dx, w), slice(0, w + dx))
    shifted[yd, xd] = ink[ys, xs]
    paper = rng.uniform(225.0, 255.0)
    fg = rng.uniform(0.0, 70.0)
    gray = paper - (paper - fg) * shifted
    for _ in range(rng.randint(0, 40)):
        y, x = rng.integers(h), rng.integers(w)
        gray[y:y + 2, x:x + 2] = fg
    gray += rng.normal_array((h, w)) * rng.uniform(3.0, 10.0)
    return np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)


# Page cells that may be swapped for another class's content (x0, y0, x1, y1).
CELLS = (
    (0.0, 0.0, 1.0, 0.25),
    (0.0, 0.75, 1.0, 1.0),
    (0.0, 0.25, 0.5, 0.75),
    (0.5, 0.25, 1.0, 0.75),
)


def render_image(grammars, label: int, seed: int, image_id: str, height: int, width: int,
                 atypical: float = 0.0) -> np.ndarray:
    """Render one page of class ``label``.

    With probability ``atypical`` each page cell is replaced by the same cell of
    a page drawn from a different class, so no single region is always
    reliable. Pixels depend only on (seed, id, label), so images can be made in
    any order.
    """
    rng = Rng.for_key(seed, image_id)
    ink = grammars[label].render(rng, height, width)
    if atypical > 0 and len(grammars) > 1:
        for x0, y0, x1, y1 in CELLS:
            if rng.random() >= atypical:
                continue
            other = rng.integers(len(grammars) - 1)
            other += other >= label
            donor = grammars[other].render(rng, height, width)
            r0, r1 = int(y0 * height + 0.5), int(y1 * height + 0.5)
            c0, c1 = int(x0 * width + 0.5), int(x1 * width + 0.5)
            ink[r0:r1, c0:c1] = donor[r0:r1, c0:c1]
    return _degrade(ink, rng)


def plan_corpus(cfg: CorpusConfig) -> list:
    """Manifest rows; labels cycle through classes so every split is balanced to +-1."""
    grammars = _grammars(cfg)
    counts = cfg.counts()
    for split, n in counts.items():
        if n < 1:
            raise CorpusError(f"{split} count must be positive, got {n}")
    prefix = "doc" if cfg.kind == "document" else "pre"
    rows = []
    index = 0
    for split in SPLITS:
        for i in range(counts[split]):
            image_id = f"{prefix}-{index:06d}"
            rows.append(ManifestRow(image_id, f"images/{image_id}.pgm", i % len(grammars), split))
            index += 1
    return rows


def _grammars(cfg: CorpusConfig):
    if cfg.kind == "document":
        return document_grammars(cfg.classes)
    if cfg.kind == "pretext":
        return pretext_grammars(cfg.classes)
    raise CorpusError(f"corpus kind must be 'document' or 'pretext', got {cfg.kind!r}")


def generate_corpus(cfg: CorpusConfig, out_dir) -> list:
    """Write ``images/*.pgm``, ``manifest.csv`` and ``corpus.cfg`` under ``out_dir``."""
    grammars = _grammars(cfg)
    rows = plan_corpus(cfg)
    out = Path(out_dir)
    try:
        (out / "images").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CorpusError(f"cannot create output directory {out}: {exc}") from exc
    for row in rows:
        pixels = render_image(grammars, row.label, cfg.seed, row.id, cfg.height, cfg.width,
                              cfg.atypical if cfg.kind == "document" else 0.0)
        pgm.write(out / row.path, pixels)
    write_manifest(out / "manifest.csv", rows)
    meta = cfg.to_dict()
    meta["class_names"] = ",".join(g.name for g in grammars)
    (out / "corpus.cfg").write_text(kvconfig.dump(meta), encoding="utf-8")
    return rows


def generate_pretext_corpus(cfg: CorpusConfig, out_dir) -> list:
    if cfg.kind != "pretext":
        cfg = CorpusConfig(**{**cfg.to_dict(), "kind": "pretext"})
    return generate_corpus(cfg, out_dir)


def write_manifest(path, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "path", "label", "split"])
    for r in rows:
        writer.writerow([r.id, r.path, r.label, r.split])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_manifest(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["id", "path", "label", "split"]:
            raise CorpusError(f"{path}: manifest header must be id,path,label,split")
        rows = [ManifestRow(r["id"], r["path"], int(r["label"]), r["split"]) for r in reader]
    bad = [r.id for r in rows if r.split not in SPLITS]
    if bad:
        raise CorpusError(f"{path}: unknown split for ids {bad[:5]}")
    return rows


def read_corpus_meta(corpus_dir) -> dict:
    return kvconfig.load(Path(corpus_dir) / "corpus.cfg")


def class_names(corpus_dir) -> list:
    return read_corpus_meta(corpus_dir)["class_names"].split(",")


def validate_corpus(corpus_dir, other_dir=None) -> list:
    """Check ids are unique and every row resolves to a PGM of the declared size.

    With ``other_dir`` also require the two corpora to share no class names.
    """
    corpus_dir = Path(corpus_dir)
    meta = read_corpus_meta(corpus_dir)
    h, w = int(meta["height"]), int(meta["width"])
    rows = read_manifest(corpus_dir / "manifest.csv")
    ids = [r.id for r in rows]
    if len(set(ids)) != len(ids):
        raise CorpusError("duplicate image ids in manifest")
    for r in rows:
        path = corpus_dir / r.path
        if not path.exists():
            raise CorpusError(f"manifest row {r.id}: missing file {r.path}")
        px = pgm.read(path)
        if px.shape != (h, w):
            raise CorpusError(f"{r.id}: image is {px.shape}, corpus declares {(h, w)}")
    if other_dir is not None:
        shared = set(class_names(corpus_dir)) & set(class_names(other_dir))
        if shared:
            raise CorpusError(f"corpora share class names: {sorted(shared)}")
    return rows


def load_images(corpus_dir, rows) -> list:
    corpus_dir = Path(corpus_dir)
    out = []
    for r in rows:
        path = corpus_dir / r.path
        if not path.exists():
            raise CorpusError(f"manifest row {r.id}: missing file {r.path}")
        out.append(LabeledImage(r.id, pgm.read(path), r.label, r.split))
    return out
