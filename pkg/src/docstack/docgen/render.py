"""Drawing primitives on an ink canvas (float, 0 = paper, 1 = full ink)."""
from __future__ import annotations

import numpy as np

from ..numerics.rng import Rng


def _hline(ink, y, x0, x1, thick, level):
    h, w = ink.shape
    y0, y1 = max(0, y), min(h, y + thick)
    x0, x1 = max(0, x0), min(w, x1)
    if y1 > y0 and x1 > x0:
        np.maximum(ink[y0:y1, x0:x1], level, out=ink[y0:y1, x0:x1])


def _vline(ink, x, y0, y1, thick, level):
    h, w = ink.shape
    x0, x1 = max(0, x), min(w, x + thick)
    y0, y1 = max(0, y0), min(h, y1)
    if y1 > y0 and x1 > x0:
        np.maximum(ink[y0:y1, x0:x1], level, out=ink[y0:y1, x0:x1])


def fill_rect(ink, x0, y0, x1, y1, level):
    h, w = ink.shape
    x0, x1, y0, y1 = max(0, x0), min(w, x1), max(0, y0), min(h, y1)
    if y1 > y0 and x1 > x0:
        np.maximum(ink[y0:y1, x0:x1], level, out=ink[y0:y1, x0:x1])


def outline(ink, x0, y0, x1, y1, thick, level):
    _hline(ink, y0, x0, x1, thick, level)
    _hline(ink, y1 - thick, x0, x1, thick, level)
    _vline(ink, x0, y0, y1, thick, level)
    _vline(ink, x1 - thick, y0, y1, thick, level)


def word_line(ink, rng: Rng, y, x0, x1, thick, level, word=(3, 16), space=(2, 5)):
    """Simulated text: a row of dark word-runs separated by small gaps."""
    x = x0
    while x < x1:
        wl = rng.randint(*word)
        _hline(ink, y, x, min(x + wl, x1), thick, level)
        x += wl + rng.randint(*space)


def text_lines(ink, rng, box, p):
    """Left-aligned lines with ragged right edge; ``indent`` chance per line."""
    x0, y0, x1, y1 = box
    thick = rng.randint(*p.get("thick", (1, 2)))
    gap = rng.randint(*p.get("gap", (4, 7)))
    lo = p.get("min_len", 0.3)
    level = p.get("level", 1.0)
    align = p.get("align", "left")
    y = y0
    while y + thick <= y1:
        length = int((x1 - x0) * rng.uniform(lo, 1.0))
        if align == "center":
            start = x0 + (x1 - x0 - length) // 2
        elif align == "right":
            start = x1 - length
        else:
            start = x0 + (rng.randint(4, 12) if rng.random() < p.get("indent", 0.0) else 0)
        word_line(ink, rng, y, start, start + length, thick, level, p.get("word", (3, 16)))
        y += thick + gap


def paragraph(ink, rng, box, p):
    """Justified lines in paragraphs of ``para`` lines; last line of each is short."""
    x0, y0, x1, y1 = box
    thick = rng.randint(*p.get("thick", (1, 2)))
    gap = rng.randint(*p.get("gap", (3, 5)))
    para_lo, para_hi = p.get("para", (3, 7))
    level = p.get("level", 1.0)
    y = y0
    while y + thick <= y1:
        n = rng.randint(para_lo, para_hi)
        for i in range(n):
            if y + thick > y1:
                break
            end = x1 if i < n - 1 else x0 + int((x1 - x0) * rng.uniform(0.2, 0.8))
            start = x0 + (rng.randint(5, 10) if i == 0 and p.get("indent") else 0)
            word_line(ink, rng, y, start, end, thick, level, p.get("word", (3, 16)))
            y += thick + gap
        y += gap + thick + rng.randint(0, 3)


def columns(ink, rng, box, p):
    x0, y0, x1, y1 = box
    n = p.get("n", 2)
    gutter = rng.randint(*p.get("gutter", (6, 12)))
    width = (x1 - x0 - gutter * (n - 1)) // n
    shared = dict(p)
    shared["thick"] = (t := rng.randint(*p.get("thick", (1, 2))), t)
    shared["gap"] = (g := rng.randint(*p.get("gap", (3, 5))), g)
    for i in range(n):
        cx = x0 + i * (width + gutter)
        paragraph(ink, rng, (cx, y0, cx + width, y1), shared)


def table(ink, rng, box, p):
    """Ruled grid; ``rules`` = 'grid' | 'rows'; cells may carry short text."""
    x0, y0, x1, y1 = box
    rows = rng.randint(*p.get("rows", (4, 8)))
    cols = rng.randint(*p.get("cols", (2, 4)))
    thick = p.get("line", 1)
    level = p.get("level", 1.0)
    rh = max(4, (y1 - y0) // rows)
    cw = max(4, (x1 - x0) // cols)
    grid = p.get("rules", "grid") == "grid"
    for r in range(rows + 1):
        _hline(ink, y0 + r * rh, x0, x0 + cols * cw + thick, thick, level)
    if grid:
        for c in range(cols + 1):
            _vline(ink, x0 + c * cw, y0, y0 + rows * rh + thick, thick, level)
    fill = p.get("fill", 0.6)
    for r in range(rows):
        for c in range(cols):
            if rng.random() < fill and rh >= 5 and cw >= 6:
                ty = y0 + r * rh + rh // 2 - 1
                tl = rng.randint(2, max(3, cw - 4))
                _hline(ink, ty, x0 + c * cw + 2, x0 + c * cw + 2 + tl, 1, level)


def masthead(ink, rng, box, p):
    """Solid band, or a few heavy title words when ``style`` is 'title'."""
    x0, y0, x1, y1 = box
    level = rng.uniform(*p.get("level", (0.7, 1.0)))
    if p.get("style", "band") == "band":
        fill_rect(ink, x0, y0, x1, y1, level)
    else:
        thick = max(2, y1 - y0)
        word_line(ink, rng, y0, x0, x1, thick, level, p.get("word", (10, 28)), (4, 8))


def image(ink, rng, box, p):
    """Smooth random texture, like a halftone photo or figure."""
    x0, y0, x1, y1 = box
    h, w = max(1, y1 - y0), max(1, x1 - x0)
    cells = rng.randint(*p.get("cells", (3, 7)))
    coarse = rng.uniform_array((cells + 1, cells + 1))
    ys = np.linspace(0, cells, h)
    xs = np.linspace(0, cells, w)
    iy = np.minimum(ys.astype(int), cells - 1)
    ix = np.minimum(xs.astype(int), cells - 1)
    fy = (ys - iy)[:, None]
    fx = (xs - ix)[None, :]
    tex = (coarse[iy][:, ix] * (1 - fy) * (1 - fx) + coarse[iy + 1][:, ix] * fy * (1 - fx)
           + coarse[iy][:, ix + 1] * (1 - fy) * fx + coarse[iy + 1][:, ix + 1] * fy * fx)
    lo, hi = p.get("level", (0.2, 0.9))
    patch = lo + (hi - lo) * tex
    region = ink[y0:y0 + h, x0:x0 + w]
    np.maximum(region, patch[:region.shape[0], :region.shape[1]], out=region)


def signature(ink, rng, box, p):
    x0, y0, x1, y1 = box
    x, y = float(x0), (y0 + y1) / 2.0
    steps = rng.randint(20, 40)
    dx = (x1 - x0) / steps
    for _ in range(steps):
        nx = x + dx
        ny = min(max(y + rng.uniform(-3.0, 3.0), y0), y1 - 2)
        for t in np.linspace(0.0, 1.0, 4):
            px, py = int(x + t * (nx - x)), int(y + t * (ny - y))
            fill_rect(ink, px, py, px + 2, py + 2, 1.0)
        x, y = nx, ny


def handwriting(ink, rng, box, p):
    """Wavy, uneven strokes on a loose baseline."""
    x0, y0, x1, y1 = box
    gap = rng.randint(*p.get("gap", (10, 16)))
    y = y0
    while y + 4 <= y1:
        amp = rng.uniform(0.5, 2.5)
        freq = rng.uniform(0.2, 0.6)
        phase = rng.uniform(0.0, 6.28)
        end = x0 + int((x1 - x0) * rng.uniform(0.4, 1.0))
        x = x0 + rng.randint(0, 8)
        while x < end:
            wl = rng.randint(6, 22)
            xs = np.arange(x, min(x + wl, end))
            ys = (y + amp * np.sin(freq * xs + phase)).astype(int)
            for xx, yy in zip(xs, ys):
                fill_rect(ink, int(xx), int(yy), int(xx) + 1, int(yy) + 2, 0.9)
            x += wl + rng.randint(3, 7)
        y += gap + rng.randint(-2, 2)


def boxes(ink, rng, box, p):
    """Rows of checkbox outlines, each followed by a short text run."""
    x0, y0, x1, y1 = box
    size = rng.randint(*p.get("size", (4, 6)))
    gap = rng.randint(*p.get("gap", (5, 9)))
    per_row = rng.randint(*p.get("per_row", (1, 3)))
    span = (x1 - x0) // per_row
    y = y0
    while y + size <= y1:
        for i in range(per_row):
            bx = x0 + i * span
            outline(ink, bx, y, bx + size, y + size, 1, 1.0)
            tl = int((span - size - 6) * rng.uniform(0.3, 0.9))
            word_line(ink, rng, y + size // 2 - 1, bx + size + 3, bx + size + 3 + tl, 1, 1.0)
        y += size + gap


def rule(ink, rng, box, p):
    x0, y0, x1, _ = box
    _hline(ink, y0, x0, x1, p.get("thick", 1), p.get("level", 1.0))


def frame(ink, rng, box, p):
    x0, y0, x1, y1 = box
    outline(ink, x0, y0, x1, y1, p.get("thick", 1), p.get("level", 1.0))


def stripes(ink, rng, box, p):
    """Periodic bars (pretext primitive); ``orient`` 'h', 'v' or 'd'."""
    x0, y0, x1, y1 = box
    period = rng.randint(*p.get("period", (4, 12)))
    width = max(1, int(period * rng.uniform(0.3, 0.6)))
    phase = rng.randint(0, period - 1)
    level = rng.uniform(0.5, 1.0)
    yy, xx = np.mgrid[y0:y1, x0:x1]
    orient = p.get("orient", "h")
    coord = {"h": yy, "v": xx, "d": xx + yy}[orient]
    mask = ((coord + phase) % period) < width
    region = ink[y0:y1, x0:x1]
    np.maximum(region, mask * level, out=region)


def checker(ink, rng, box, p):
    x0, y0, x1, y1 = box
    cell = rng.randint(*p.get("cell", (4, 14)))
    level = rng.uniform(0.5, 1.0)
    yy, xx = np.mgrid[y0:y1, x0:x1]
    mask = ((yy // cell + xx // cell) % 2) == 0
    region = ink[y0:y1, x0:x1]
    np.maximum(region, mask * level, out=region)


def blobs(ink, rng, box, p):
    x0, y0, x1, y1 = box
    yy, xx = np.mgrid[y0:y1, x0:x1]
    for _ in range(rng.randint(*p.get("count", (3, 8)))):
        cy, cx = rng.uniform(y0, y1), rng.uniform(x0, x1)
        r = rng.uniform(6, 28)
        mask = ((yy - cy) ** 2 + (xx - cx) ** 2) < r * r
        region = ink[y0:y1, x0:x1]
        np.maximum(region, mask * rng.uniform(0.5, 1.0), out=region)


def texture(ink, rng, box, p):
    x0, y0, x1, y1 = box
    density = rng.uniform(*p.get("density", (0.2, 0.5)))
    noise = rng.uniform_array((y1 - y0, x1 - x0)) < density
    region = ink[y0:y1, x0:x1]
    np.maximum(region, noise * rng.uniform(0.5, 1.0), out=region)


PRIMITIVES = {
    "text_lines": text_lines,
    "paragraph": paragraph,
    "columns": columns,
    "table": table,
    "masthead": masthead,
    "image": image,
    "signature": signature,
    "handwriting": handwriting,
    "boxes": boxes,
    "rule": rule,
    "frame": frame,
    "stripes": stripes,
    "checker": checker,
    "blobs": blobs,
    "texture": texture,
}
