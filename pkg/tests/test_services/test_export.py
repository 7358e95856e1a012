"""Tests for export service."""

import csv
import json
import math

import pytest
from openpyxl import load_workbook

from src.core.models import BellLabel, SweepRow, SweepStatus
from src.services.export import (
    ExportService,
    format_number,
    get_export_service,
    round_float,
)
from src.services.protocol import run_protocol


@pytest.fixture
def export_service():
    """Create an ExportService for testing."""
    return ExportService()


@pytest.fixture
def report(run_config):
    return run_protocol(run_config.ring_a, run_config.ring_b)


@pytest.fixture
def sweep_rows():
    """Two points: one regular and one non-unitary."""
    rows = [
        SweepRow("ring_b.l1", math.pi, label, SweepStatus.OK, 0.25, 1 / 3, 1.0)
        for label in BellLabel
    ]
    rows += [SweepRow("ring_b.l1", 2.0, label, SweepStatus.NON_UNITARY) for label in BellLabel]
    return rows


class TestNumberFormatting:
    """Test 15-significant-digit formatting."""

    def test_format_number(self):
        assert format_number(math.pi) == "3.14159265358979"
        assert format_number(0.0) == "0"
        assert format_number(None) == ""

    def test_round_float(self):
        assert round_float(1 / 3) == 0.333333333333333
        assert round_float(1.0000000000000002) == 1.0


class TestRunJson:
    """Test JSON run reports."""

    def test_write_run_json(self, export_service, report, run_config, tmp_path):
        path = tmp_path / "run.json"
        success, error = export_service.write_run_json(report, run_config, path)

        assert success is True
        assert error == ""
        document = json.loads(path.read_text(encoding="utf-8"))
        assert list(document) == sorted(document)
        assert document["mode"] == "constraint"
        assert document["design_row"] == "phi_plus"
        assert [o["label"] for o in document["outcomes"]] == BellLabel.values()
        assert document["config_echo"]["seed"] == 42
        assert set(document["table1_constraints"]) == set(BellLabel.values())

    def test_floats_are_rounded(self, export_service, report):
        document = export_service.report_document(report)
        for outcome in document["outcomes"]:
            assert outcome["fidelity"] == 1.0
            assert outcome["probability"] == 0.25
        assert document["config_echo"] is None

    def test_rewrites_are_identical(self, export_service, report, run_config, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        export_service.write_run_json(report, run_config, first)
        export_service.write_run_json(report, run_config, second)
        assert first.read_bytes() == second.read_bytes()

    def test_invalid_path(self, export_service, report, run_config, tmp_path):
        """Test export to invalid path fails gracefully."""
        success, error = export_service.write_run_json(report, run_config, tmp_path / "missing" / "run.json")

        assert success is False
        assert len(error) > 0


class TestSweepCsv:
    """Test CSV sweep tables."""

    def test_write_sweep_csv(self, export_service, sweep_rows, tmp_path):
        path = tmp_path / "sweep.csv"
        success, error = export_service.write_sweep_csv(sweep_rows, path)

        assert success is True
        assert error == ""
        with open(path, newline="", encoding="utf-8") as f:
            table = list(csv.reader(f))
        assert table[0] == ["param", "value", "outcome", "probability", "fidelity", "concurrence", "status"]
        assert table[1] == ["ring_b.l1", "3.14159265358979", "phi_plus", "0.25", "0.333333333333333", "1", "ok"]
        assert table[5] == ["ring_b.l1", "2", "phi_plus", "", "", "", "non-unitary"]
        assert len(table) == 9

    def test_unix_line_endings(self, export_service, sweep_rows, tmp_path):
        path = tmp_path / "sweep.csv"
        export_service.write_sweep_csv(sweep_rows, path)
        assert b"\r\n" not in path.read_bytes()

    def test_invalid_path(self, export_service, sweep_rows, tmp_path):
        success, error = export_service.write_sweep_csv(sweep_rows, tmp_path / "missing" / "sweep.csv")

        assert success is False
        assert "CSV export failed" in error


class TestSweepXlsx:
    """Test Excel sweep workbooks."""

    def test_write_sweep_xlsx(self, export_service, sweep_rows, tmp_path):
        path = tmp_path / "sweep.xlsx"
        success, error = export_service.write_sweep_xlsx(sweep_rows, path)

        assert success is True
        assert error == ""
        ws = load_workbook(path).active
        assert ws.title == "Sweep"
        assert ws.freeze_panes == "A2"
        assert ws.cell(row=1, column=1).value == "param"
        assert ws.cell(row=1, column=1).font.bold
        assert ws.cell(row=2, column=2).value == pytest.approx(math.pi)
        assert ws.cell(row=2, column=3).value == "phi_plus"
        assert ws.cell(row=6, column=4).value is None
        assert ws.cell(row=6, column=7).value == "non-unitary"

    def test_empty_rows(self, export_service, tmp_path):
        path = tmp_path / "empty.xlsx"
        success, _ = export_service.write_sweep_xlsx([], path)

        assert success is True
        assert load_workbook(path).active.max_row == 1

    def test_invalid_path(self, export_service, sweep_rows, tmp_path):
        """Test export to invalid path fails gracefully."""
        success, error = export_service.write_sweep_xlsx(sweep_rows, tmp_path / "missing" / "sweep.xlsx")

        assert success is False
        assert len(error) > 0


class TestOutputPath:
    """Test output file naming."""

    def test_creates_directory(self, tmp_path):
        path = ExportService.output_path(tmp_path / "out" / "nested", "symmetric", "run.json")
        assert path.name == "symmetric_run.json"
        assert path.parent.is_dir()

    def test_singleton(self):
        assert get_export_service() is get_export_service()
