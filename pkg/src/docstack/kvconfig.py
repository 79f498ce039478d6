"""Plain-text ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Keys may carry dotted section
prefixes (``holistic.epochs = 25``). Parse errors cite the 1-based line.
"""
from __future__ import annotations

from pathlib import Path


class ConfigError(ValueError):
    pass


def parse(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key or any(ch.isspace() for ch in key):
            raise ConfigError(f"{source}:{lineno}: invalid key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load(path) -> dict:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), str(path))


def dump(values: dict) -> str:
    return "".join(f"{k} = {values[k]}\n" for k in sorted(values))
