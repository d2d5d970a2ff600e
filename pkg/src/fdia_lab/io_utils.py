"""CSV/JSON helpers shared by the module-level exporters.

All writers are byte-deterministic: floats are serialized with ``repr``
(shortest round-trip form), JSON keys are sorted, and no timestamps are
emitted anywhere.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError


def fmt_cell(value) -> str:
    """Format one CSV cell. None/NaN become the empty cell (= missing)."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return ""
    return repr(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing file: {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise DataError(f"empty CSV file: {path}")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:] if line != ""]
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i + 1} has {len(row)} cells, expected {len(header)}")
    return header, rows


def parse_cell(text: str) -> float:
    return math.nan if text == "" else float(text)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing file: {path}")
    return json.loads(path.read_text())
