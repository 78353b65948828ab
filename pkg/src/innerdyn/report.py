"""CSV tables and the run manifest.

CSV bodies are a pure function of the data: ``,`` separator, ``.`` decimal,
LF line endings and ``%.17g`` reals, so a rerun with the same seed gives
identical bytes. Timestamps only appear in the manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass
class Table:
    name: str
    columns: Sequence[str]
    rows: list
    comments: list = field(default_factory=list)
    column_notes: dict = field(default_factory=dict)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    s = str(v)
    if any(c in s for c in ",\n\"#"):
        raise ValueError(f"CSV cell {s!r} contains a reserved character")
    return s


def render_csv(table: Table) -> bytes:
    lines = [f"# {c}" for c in table.comments]
    for col in table.columns:
        note = table.column_notes.get(col)
        if note:
            lines.append(f"# {col}: {note}")
    lines.append(",".join(table.columns))
    width = len(table.columns)
    for row in table.rows:
        if len(row) != width:
            raise ValueError(f"{table.name}: row of width {len(row)}, expected {width}")
        lines.append(",".join(format_value(v) for v in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_csv(directory: Path, table: Table) -> tuple[Path, str]:
    data = render_csv(table)
    path = Path(directory) / f"{table.name}.csv"
    path.write_bytes(data)
    return path, hashlib.sha256(data).hexdigest()


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and raw rows of a CSV written by :func:`write_csv`."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def write_manifest(directory: Path, manifest: dict) -> Path:
    path = Path(directory) / "manifest.json"
    path.write_text(json.dumps(_clean(manifest), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path
