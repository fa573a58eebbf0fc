"""
I/O Handler Component - point files, report files and CSV tables.

Point files are plain text with one point per line; reports are JSON;
experiment tables are CSV with a header row.
"""

from .core import (
    PointFileError,
    format_point_lines,
    parse_point_text,
    read_point_file,
    write_csv,
    write_point_file,
    write_report_json,
)

__all__ = [
    "PointFileError",
    "format_point_lines",
    "parse_point_text",
    "read_point_file",
    "write_csv",
    "write_point_file",
    "write_report_json",
]
