"""Serialization of flat result records to CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any, Literal

import numpy as np

OutputFormat = Literal["csv", "json"]

SIGNIFICANT_DIGITS = 12

Record = Mapping[str, Any]


def _scalar(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}") if math.isfinite(value) else value
    return value


def _csv_cell(value: Any) -> str:
    value = _scalar(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def _json_value(value: Any) -> Any:
    value = _scalar(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def resolve_columns(records: Sequence[Record], columns: Sequence[str] | None = None) -> list[str]:
    """Column order: ``columns`` when given, otherwise the keys of the first record."""
    if columns is not None:
        return list(columns)
    return list(records[0].keys()) if records else []


def render(records: Sequence[Record], fmt: OutputFormat, columns: Sequence[str] | None = None) -> str:
    """Render a homogeneous batch of records; floats keep twelve significant digits."""
    names = resolve_columns(records, columns)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        if names:
            writer.writerow(names)
        for record in records:
            writer.writerow([_csv_cell(record.get(name)) for name in names])
        return buffer.getvalue()
    rows = [{name: _json_value(record.get(name)) for name in names} for record in records]
    return json.dumps(rows, indent=2, allow_nan=False) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write ``text`` to a sibling temporary file and rename it over ``path``."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def emit(
    records: Sequence[Record],
    fmt: OutputFormat,
    path: str | Path | None = None,
    columns: Sequence[str] | None = None,
) -> str:
    """Render ``records`` and write them to ``path`` if given; the rendered text is returned."""
    text = render(records, fmt, columns)
    if path is not None:
        write_atomic(path, text)
    return text
