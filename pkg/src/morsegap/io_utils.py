"""Deterministic CSV/JSON writers.

All floats are rendered with %.12g so identical configurations produce
byte-identical outputs; empty cells are written as empty strings.
"""

from __future__ import annotations

import json
from pathlib import Path


def fmt(x) -> str:
    """%.12g rendering; passes strings/ints through, None becomes empty."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".12g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _json_ready(obj):
    """Round floats through %.12g so JSON output is formatting-stable."""
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_ready(payload), indent=2, sort_keys=True) + "\n")
    return path
