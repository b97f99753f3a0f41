"""Deterministic JSON and CSV reports.

Keys are sorted and floats are written with 17 significant digits, so equal
inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import GridSpec

SCHEMA = 1


def _float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialise non-finite value {v!r}")
    if v == 0.0:
        v = 0.0  # drop the sign of zero
    return format(v, ".17g")


def _normalize(obj):
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, GridSpec):
        return grid_metadata(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(obj, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            out.append(f"{pad}{json.dumps(k)}: ")
            _emit(obj[k], indent, level + 1, out)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif obj is None:
        out.append("null")
    elif isinstance(obj, int):
        out.append(str(obj))
    else:
        out.append(json.dumps(obj))


def dumps(report: dict, indent: int = 2) -> str:
    out: list = []
    _emit(_normalize(report), indent, 0, out)
    return "".join(out) + "\n"


def grid_metadata(spec: Optional[GridSpec]) -> Optional[dict]:
    if spec is None:
        return None
    return {"Nx": spec.Nx, "Ny": spec.Ny, "Na": spec.Na, "text": str(spec)}


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def to_csv(report: dict) -> str:
    """Two-column ``key,value`` rendering with dotted keys."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(_normalize(report)):
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = _float(v)
        elif v is None:
            v = ""
        w.writerow([k, v])
    return buf.getvalue()


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps(report)
    if fmt == "csv":
        return to_csv(report)
    raise ValueError(f"unknown report format {fmt!r}")


@dataclass
class InvariantReport:
    """Payload of one CLI run plus the metadata every report carries."""

    command: str
    kind: str
    values: dict = field(default_factory=dict)
    grid: Optional[GridSpec] = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "kind": self.kind,
            "grid": grid_metadata(self.grid),
            "notes": list(self.notes),
            **self.values,
        }
