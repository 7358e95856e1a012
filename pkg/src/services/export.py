"""Export service for run reports and sweep tables."""

import csv
import json
from pathlib import Path
from typing import Any, Optional

from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

from src.core.models import BellLabel, ProtocolReport, RunConfig, SweepRow
from src.services.protocol import feed_forward_constraints

SIGNIFICANT_DIGITS = 15


def round_float(value: float) -> float:
    """Round to 15 significant digits."""
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def format_number(value: Optional[float]) -> str:
    """Number with 15 significant digits, empty for None."""
    return "" if value is None else f"{value:.{SIGNIFICANT_DIGITS}g}"


def _rounded(data: Any) -> Any:
    if isinstance(data, bool) or data is None:
        return data
    if isinstance(data, float):
        return round_float(data)
    if isinstance(data, dict):
        return {k: _rounded(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_rounded(v) for v in data]
    return data


class ExportService:
    """
    Writes simulator results to disk.

    Supports:
    - JSON run reports
    - CSV sweep tables
    - Excel sweep workbooks
    """

    # Column configuration for sweep tables: (header, field, width)
    SWEEP_COLUMNS = [
        ("param", "param", 32),
        ("value", "value", 22),
        ("outcome", "outcome", 12),
        ("probability", "probability", 22),
        ("fidelity", "fidelity", 22),
        ("concurrence", "concurrence", 22),
        ("status", "status", 14),
    ]

    # Header style
    HEADER_FILL = PatternFill(start_color="2D3E50", end_color="2D3E50", fill_type="solid")
    HEADER_FONT = Font(color="FFFFFF", bold=True)
    HEADER_ALIGNMENT = Alignment(horizontal="center", vertical="center")

    # Cell border
    THIN_BORDER = Border(
        left=Side(style="thin"),
        right=Side(style="thin"),
        top=Side(style="thin"),
        bottom=Side(style="thin")
    )

    @staticmethod
    def output_path(out_dir, stem: str, suffix: str) -> Path:
        """``<out_dir>/<stem>_<suffix>``, creating the directory."""
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        return directory / f"{stem}_{suffix}"

    @staticmethod
    def report_document(report: ProtocolReport, config: Optional[RunConfig] = None) -> dict:
        """Full JSON document for a run, floats rounded to 15 significant digits."""
        document = report.to_dict()
        document["config_echo"] = config.to_dict() if config else None
        document["table1_constraints"] = {
            label.value: feed_forward_constraints(label).to_dict() for label in BellLabel
        }
        return _rounded(document)

    def write_run_json(
        self,
        report: ProtocolReport,
        config: Optional[RunConfig],
        file_path,
    ) -> tuple[bool, str]:
        """
        Write a run report as JSON with sorted keys.

        Returns:
            Tuple of (success, error_message)
        """
        try:
            text = json.dumps(self.report_document(report, config), indent=2, sort_keys=True, ensure_ascii=False)
            Path(file_path).write_text(text + "\n", encoding="utf-8")
            return True, ""
        except (OSError, TypeError, ValueError) as e:
            return False, f"Report export failed: {str(e)}"

    @staticmethod
    def _row_values(row: SweepRow) -> list[str]:
        return [
            row.param,
            format_number(row.value),
            row.outcome.value,
            format_number(row.probability),
            format_number(row.fidelity),
            format_number(row.concurrence),
            row.status.value,
        ]

    def write_sweep_csv(self, rows: list[SweepRow], file_path) -> tuple[bool, str]:
        """
        Write sweep rows as CSV.

        Returns:
            Tuple of (success, error_message)
        """
        try:
            with open(file_path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow([header for header, _, _ in self.SWEEP_COLUMNS])
                for row in rows:
                    writer.writerow(self._row_values(row))
            return True, ""
        except OSError as e:
            return False, f"CSV export failed: {str(e)}"

    def write_sweep_xlsx(self, rows: list[SweepRow], file_path) -> tuple[bool, str]:
        """
        Write sweep rows to an Excel workbook.

        Returns:
            Tuple of (success, error_message)
        """
        try:
            wb = Workbook()
            ws = wb.active
            ws.title = "Sweep"

            # Write headers
            for col_idx, (header, _, width) in enumerate(self.SWEEP_COLUMNS, 1):
                cell = ws.cell(row=1, column=col_idx, value=header)
                cell.fill = self.HEADER_FILL
                cell.font = self.HEADER_FONT
                cell.alignment = self.HEADER_ALIGNMENT
                cell.border = self.THIN_BORDER
                ws.column_dimensions[get_column_letter(col_idx)].width = width

            # Write data; numbers stay numeric, missing values stay empty
            for row_idx, row in enumerate(rows, 2):
                for col_idx, (_, field, _) in enumerate(self.SWEEP_COLUMNS, 1):
                    value = getattr(row, field)
                    if hasattr(value, "value"):
                        value = value.value
                    elif isinstance(value, float):
                        value = round_float(value)
                    cell = ws.cell(row=row_idx, column=col_idx, value=value)
                    cell.border = self.THIN_BORDER

            # Freeze header row
            ws.freeze_panes = "A2"

            wb.save(file_path)
            return True, ""

        except Exception as e:
            return False, f"Excel export failed: {str(e)}"


# Singleton instance
_export_service: Optional[ExportService] = None


def get_export_service() -> ExportService:
    """Get the singleton export service instance."""
    global _export_service
    if _export_service is None:
        _export_service = ExportService()
    return _export_service
