"""
Core file handling for the io_handler component.

All files are UTF-8. Point coordinates and report floats are written with
17 significant digits so a parsed file re-serializes byte-identically.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from cap_discrepancy.discrepancy_core import PointSet

ENCODING = "utf-8"
COMMENT_PREFIX = "#"
STDIN_MARKER = "-"
JSON_INDENT = "  "


class PointFileError(Exception):
    """Exception raised for malformed point files."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


def parse_point_text(text: str, source: str = "<text>", tolerance: float = 1e-9) -> PointSet:
    """Parse point file content into a validated PointSet.

    Raises:
        PointFileError: If a line is not numeric, field counts differ, n < 2
            or there are no data lines
        PointSetError: If points are not unit length within ``tolerance``
    """
    rows: list[list[float]] = []
    width: int | None = None
    first_line = 0

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIX):
            continue
        fields = line.split()
        try:
            values = [float(field) for field in fields]
        except ValueError as e:
            raise PointFileError(
                f"{source}:{line_number}: non-numeric field in {line!r}",
                {"source": source, "line": line_number},
            ) from e
        if not all(np.isfinite(values)):
            raise PointFileError(
                f"{source}:{line_number}: non-finite coordinate",
                {"source": source, "line": line_number},
            )
        if width is None:
            width, first_line = len(values), line_number
        elif len(values) != width:
            raise PointFileError(
                f"{source}:{line_number}: expected {width} fields (as on line {first_line}), got {len(values)}",
                {"source": source, "line": line_number, "expected": width, "found": len(values)},
            )
        rows.append(values)

    if width is None:
        raise PointFileError(f"{source}: no data lines", {"source": source})
    if width < 2:
        raise PointFileError(
            f"{source}:{first_line}: points need at least 2 coordinates, got {width}",
            {"source": source, "line": first_line, "found": width},
        )
    return PointSet.from_array(np.array(rows, dtype=np.float64), tolerance=tolerance)


def read_point_file(path: str | Path, tolerance: float = 1e-9) -> PointSet:
    """Read a point file, or stdin when ``path`` is ``-``.

    Raises:
        PointFileError: If the file cannot be read or is malformed
        PointSetError: If points are not unit length
    """
    if str(path) == STDIN_MARKER:
        return parse_point_text(sys.stdin.read(), "<stdin>", tolerance)

    try:
        text = Path(path).read_text(encoding=ENCODING)
    except (OSError, UnicodeDecodeError) as e:
        raise PointFileError(f"Cannot read point file {path}: {e}", {"source": str(path)}) from e
    return parse_point_text(text, str(path), tolerance)


def format_point_lines(ps: PointSet) -> str:
    lines = (" ".join(f"{value:.17g}" for value in row) for row in ps.points)
    return "".join(f"{line}\n" for line in lines)


def write_point_file(path: str | Path, ps: PointSet, header: Sequence[str] = ()) -> None:
    """Write a point file with optional ``#`` comment lines first."""
    comments = "".join(f"{COMMENT_PREFIX} {line}\n" for line in header)
    Path(path).write_text(comments + format_point_lines(ps), encoding=ENCODING)


def _plain(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def _encode(value: Any, depth: int) -> str:
    """JSON text with every float at 17 significant digits, indented by two spaces."""
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Out of range float values are not JSON compliant: {value!r}")
        return format(value, "#.17g")
    outer = JSON_INDENT * depth
    inner = JSON_INDENT * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = (f"{inner}{json.dumps(key)}: {_encode(item, depth + 1)}" for key, item in value.items())
        return "{\n" + ",\n".join(items) + f"\n{outer}}}"
    if isinstance(value, list):
        if not value:
            return "[]"
        items = (f"{inner}{_encode(item, depth + 1)}" for item in value)
        return "[\n" + ",\n".join(items) + f"\n{outer}]"
    return json.dumps(value)


def write_report_json(path: str | Path | None, report: Mapping[str, Any]) -> str:
    """Serialize a report mapping; writes it to ``path`` unless None.

    Floats carry 17 significant digits (``#.17g``), so they re-read exactly
    and always parse back as floats.
    """
    text = _encode(_plain(report), 0) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding=ENCODING)
    return text


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write a CSV table with a mandatory header row. Returns the data row count."""
    count = 0
    with Path(path).open("w", encoding=ENCODING, newline="") as handle:
        writer = csv.writer(handle, delimiter=",", lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_plain(value) for value in row])
            count += 1
    return count
