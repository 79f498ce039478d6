"""Framed binary container shared by network checkpoints and fitted meta-models.

Layout (all integers little-endian)::

    magic       4 bytes   kind tag, e.g. b"DSCK" for network checkpoints
    version     u8
    header_len  u32
    header      UTF-8 JSON (sorted keys)
    n_arrays    u32
    n_arrays x:
        name_len u16, name (UTF-8)
        dtype    u8   (0 = float32, 1 = float64, 2 = int64)
        ndim     u8, dims u32 * ndim
        data     row-major, little-endian
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8"), 2: np.dtype("<i8")}
_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1, np.dtype("int64"): 2}


class ContainerError(Exception):
    pass


class BadMagicError(ContainerError):
    pass


class VersionMismatchError(ContainerError):
    pass


class TruncatedFileError(ContainerError):
    pass


def encode(magic: bytes, header: dict, arrays: dict, version: int = FORMAT_VERSION) -> bytes:
    if len(magic) != 4:
        raise ValueError(f"magic must be 4 bytes, got {magic!r}")
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [magic, struct.pack("<BI", version, len(head)), head, struct.pack("<I", len(arrays))]
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        code = _CODES.get(arr.dtype)
        if code is None:
            raise ValueError(f"array {name!r}: unsupported dtype {arr.dtype}")
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(struct.pack("<BB", code, arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedFileError(
                f"truncated while reading {what}: need {n} bytes at offset {self.pos}, "
                f"file has {len(self.buf)}"
            )
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode(buf: bytes, magic: bytes, version: int = FORMAT_VERSION):
    r = _Reader(buf)
    got = r.take(4, "magic")
    if got != magic:
        raise BadMagicError(f"bad magic {got!r}, expected {magic!r}")
    (ver,) = r.unpack("<B", "version")
    if ver != version:
        raise VersionMismatchError(f"file format version {ver}, reader supports version {version}")
    (hlen,) = r.unpack("<I", "header length")
    header = json.loads(r.take(hlen, "header").decode("utf-8"))
    (count,) = r.unpack("<I", "array count")
    arrays = {}
    for _ in range(count):
        (nlen,) = r.unpack("<H", "array name length")
        name = r.take(nlen, "array name").decode("utf-8")
        code, ndim = r.unpack("<BB", f"{name} dtype")
        if code not in _DTYPES:
            raise ContainerError(f"array {name!r}: unknown dtype code {code}")
        dims = r.unpack(f"<{ndim}I", f"{name} shape")
        dt = _DTYPES[code]
        nbytes = int(np.prod(dims, dtype=np.int64)) * dt.itemsize
        data = r.take(nbytes, f"{name} data")
        arrays[name] = np.frombuffer(data, dtype=dt).reshape(dims).astype(dt.newbyteorder("="))
    if r.pos != len(buf):
        raise ContainerError(f"{len(buf) - r.pos} trailing bytes after last array")
    return header, arrays


def write(path, magic: bytes, header: dict, arrays: dict) -> None:
    Path(path).write_bytes(encode(magic, header, arrays))


def read(path, magic: bytes):
    return decode(Path(path).read_bytes(), magic)
