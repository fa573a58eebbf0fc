from cap_discrepancy.io_handler import core


import csv
import io
import json

import numpy as np
import pytest

from cap_discrepancy.discrepancy_core import PointSet, PointSetError
from cap_discrepancy.io_handler.core import (
    PointFileError,
    format_point_lines,
    parse_point_text,
    read_point_file,
    write_csv,
    write_point_file,
    write_report_json,
)
from cap_discrepancy.samplers import SamplerSpec, sample


class TestPointFiles:
    """Parsing and writing of plain-text point files."""

    def test_parse_with_comments_and_blank_lines(self):
        text = "# header\n1 0 0\n\n  0 1 0  \n# trailing\n0 0 1\n"
        ps = parse_point_text(text)
        assert ps.N == 3
        assert ps.n == 3

    def test_ragged_lines_report_line_number(self):
        with pytest.raises(PointFileError) as exc_info:
            parse_point_text("1 0 0\n0 1\n", source="pts.txt")
        assert exc_info.value.context["line"] == 2
        assert "pts.txt:2" in str(exc_info.value)

    def test_non_numeric_field(self):
        with pytest.raises(PointFileError) as exc_info:
            parse_point_text("# c\n1 0\nfoo 1\n")
        assert exc_info.value.context["line"] == 3

    @pytest.mark.parametrize("text", ["", "# only comments\n", "1\n1\n", "inf 0\n"])
    def test_malformed_files(self, text):
        with pytest.raises(PointFileError):
            parse_point_text(text)

    def test_non_unit_points(self):
        with pytest.raises(PointSetError) as exc_info:
            parse_point_text("1 0\n0.5 0.5\n")
        assert exc_info.value.context["offenders"][0][0] == 1

    def test_round_trip_is_byte_identical(self, tmp_path):
        ps = sample(SamplerSpec("gauss-mc", 3, 25, 7))
        first = tmp_path / "first.txt"
        second = tmp_path / "second.txt"
        write_point_file(first, ps, header=["sample"])
        parsed = read_point_file(first)
        write_point_file(second, parsed, header=["sample"])
        assert first.read_bytes() == second.read_bytes()
        assert np.array_equal(parsed.points, ps.points)

    def test_seventeen_significant_digits(self):
        ps = PointSet.from_array([[0.6, 0.8]])
        assert format_point_lines(ps) == "0.59999999999999998 0.80000000000000004\n"

    def test_read_missing_file(self, tmp_path):
        with pytest.raises(PointFileError):
            read_point_file(tmp_path / "missing.txt")

    def test_read_from_stdin(self, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("0 1\n1 0\n"))
        assert read_point_file("-").N == 2


class TestTables:
    def test_report_json_keeps_round_trip_floats(self, tmp_path):
        path = tmp_path / "report.json"
        text = write_report_json(path, {"delta": 0.1 + 0.2, "w": np.array([1.0, 0.0]), "n": np.int64(3)})
        loaded = json.loads(path.read_text(encoding="utf-8"))
        assert loaded["delta"] == 0.1 + 0.2
        assert loaded["w"] == [1.0, 0.0]
        assert loaded["n"] == 3
        assert text == path.read_text(encoding="utf-8")

    def test_report_json_rejects_nan(self):
        with pytest.raises(ValueError):
            write_report_json(None, {"delta": float("nan")})

    def test_report_json_floats_have_seventeen_digits(self):
        text = write_report_json(None, {"delta": 0.6, "t": 1.0, "tol": 1e-10, "argmax": {"w": [0.8, -0.0]}})
        assert '"delta": 0.59999999999999998' in text
        assert '"t": 1.0000000000000000' in text
        assert '"tol": 1.0000000000000000e-10' in text
        assert "-0.0000000000000000" in text
        loaded = json.loads(text)
        assert isinstance(loaded["t"], float)
        assert loaded["argmax"]["w"] == [0.8, 0.0]

    def test_report_json_layout(self):
        text = write_report_json(None, {"n": 3, "flags": [], "argmax": {"subset": [0, 2], "family": "phi1"}})
        assert text == (
            "{\n"
            '  "n": 3,\n'
            '  "flags": [],\n'
            '  "argmax": {\n'
            '    "subset": [\n'
            "      0,\n"
            "      2\n"
            "    ],\n"
            '    "family": "phi1"\n'
            "  }\n"
            "}\n"
        )

    @pytest.mark.parametrize("seed", range(5))
    def test_report_json_floats_reread_exactly(self, seed):
        values = np.random.default_rng(seed).standard_normal(200) * 10.0 ** np.arange(-100, 100)
        loaded = json.loads(write_report_json(None, {"values": values}))
        assert np.array_equal(np.array(loaded["values"]), values)

    def test_csv_header_and_rows(self, tmp_path):
        path = tmp_path / "table.csv"
        count = write_csv(path, ("scheme", "N", "delta"), [("gauss-mc", 50, 0.25), ("gauss-mc", 100, np.float64(0.125))])
        assert count == 2
        with path.open(encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows == [["scheme", "N", "delta"], ["gauss-mc", "50", "0.25"], ["gauss-mc", "100", "0.125"]]

    def test_module_encoding(self):
        assert core.ENCODING == "utf-8"
