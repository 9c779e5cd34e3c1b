"""Deterministic JSON serialization for model and report files.

Floats are written with 17 significant digits (enough to round-trip any
IEEE-754 double exactly), so files produced from the same state are
byte-identical and reload losslessly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Serialize like ``json.dumps`` but with 17-significant-digit floats."""
    parts: list[str] = []
    _write(obj, parts, indent, 0)
    return "".join(parts)


def _write(obj, parts: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1)) if indent else ""
    end_pad = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl
    colon = ": " if indent else ":"
    if obj is None or isinstance(obj, (bool, str)):
        parts.append(json.dumps(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{" + nl)
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {key!r}")
            parts.append(pad + json.dumps(key) + colon)
            _write(value, parts, indent, level + 1)
            parts.append(sep if i < len(obj) - 1 else nl)
        parts.append(end_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            parts.append("[]")
            return
        parts.append("[" + nl)
        for i, value in enumerate(obj):
            parts.append(pad)
            _write(value, parts, indent, level + 1)
            parts.append(sep if i < len(obj) - 1 else nl)
        parts.append(end_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: str | Path, obj, indent: int = 2) -> None:
    Path(path).write_text(dumps(obj, indent=indent) + "\n", encoding="utf-8")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
