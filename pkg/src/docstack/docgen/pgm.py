"""Binary PGM (P5) read/write for 8-bit grayscale images."""
from __future__ import annotations

from pathlib import Path

import numpy as np


class PGMError(ValueError):
    pass


def encode(pixels: np.ndarray) -> bytes:
    if pixels.dtype != np.uint8 or pixels.ndim != 2:
        raise PGMError(f"PGM needs a 2-D uint8 array, got {pixels.dtype} {pixels.shape}")
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes()


def decode(buf: bytes) -> np.ndarray:
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        tokens.append(buf[start:pos])
    if tokens[0] != b"P5":
        raise PGMError(f"not a binary PGM (magic {tokens[0]!r})")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise PGMError(f"only 8-bit PGM supported, maxval {maxval}")
    pos += 1
    data = buf[pos:pos + w * h]
    if len(data) != w * h:
        raise PGMError(f"PGM pixel data truncated: {len(data)} of {w * h} bytes")
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w).copy()


def write(path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(encode(pixels))


def read(path) -> np.ndarray:
    return decode(Path(path).read_bytes())
