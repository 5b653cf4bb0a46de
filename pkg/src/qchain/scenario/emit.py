"""Report rendering as text tables, versioned JSON or CSV."""

from __future__ import annotations

import csv
import io
import json
from typing import Any

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from qchain.config import OutputFormat
from qchain.constants import DEFAULT_SIGNIFICANT_DIGITS, REPORT_FORMAT_VERSION
from qchain.errors import ErrorCode, ScenarioParseError
from qchain.scenario.runner import HistoriesSummary, Report, ReportRow

TABLE_WIDTH = 120


def format_probability(value: float, digits: int = DEFAULT_SIGNIFICANT_DIGITS) -> str:
    """Probability printed with ``digits`` significant digits."""
    return f"{value:.{digits}g}"


def _rounded(value: float | None, digits: int) -> float | None:
    return None if value is None else float(format_probability(value, digits))


def _row_dict(row: ReportRow, digits: int) -> dict[str, Any]:
    data: dict[str, Any] = {
        "labels": list(row.labels),
        "probability": _rounded(row.probability, digits),
    }
    if row.reference is not None:
        data["reference"] = _rounded(row.reference, digits)
    if row.difference is not None:
        data["difference"] = _rounded(row.difference, digits)
    return data


def _histories_dict(summary: HistoriesSummary, digits: int) -> dict[str, Any]:
    return {
        "family": summary.family,
        "consistent": summary.consistent,
        "max_off_diagonal": _rounded(summary.max_off_diagonal, digits),
        "tolerance": summary.tolerance,
        "marginal_deviation": _rounded(summary.marginal_deviation, digits),
        "total": _rounded(summary.total, digits),
    }


def report_to_dict(report: Report, digits: int = DEFAULT_SIGNIFICANT_DIGITS) -> dict[str, Any]:
    """JSON-ready mapping with rounded probabilities and a fixed key order."""
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "name": report.name,
        "query": report.query,
        "engine": report.engine,
        "axes": list(report.axes),
        "reference": report.reference,
        "rows": [_row_dict(row, digits) for row in report.rows],
        "max_difference": _rounded(report.max_difference, digits),
        "total": _rounded(report.total, digits),
        "histories": [_histories_dict(h, digits) for h in report.histories],
    }


def emit_json(report: Report, digits: int = DEFAULT_SIGNIFICANT_DIGITS) -> str:
    return json.dumps(report_to_dict(report, digits), indent=2) + "\n"


def emit_csv(report: Report, digits: int = DEFAULT_SIGNIFICANT_DIGITS) -> str:
    """One header line, then one line per row in report order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = [*report.axes, "probability"]
    if report.reference is not None:
        header += [report.reference, "difference"]
    writer.writerow(header)
    for row in report.rows:
        line = [*row.labels, format_probability(row.probability, digits)]
        if report.reference is not None:
            line += [
                format_probability(row.reference or 0.0, digits),
                format_probability(row.difference or 0.0, digits),
            ]
        writer.writerow(line)
    return buffer.getvalue()


def build_table(report: Report, digits: int = DEFAULT_SIGNIFICANT_DIGITS) -> Table:
    """Rich table of the report rows."""
    table = Table(title=f"{report.name} ({report.query}, {report.engine})")
    for axis in report.axes:
        table.add_column(axis, style="cyan")
    table.add_column("probability", justify="right", style="green")
    if report.reference is not None:
        table.add_column(report.reference, justify="right")
        table.add_column("difference", justify="right", style="yellow")
    for row in report.rows:
        cells = [*row.labels, format_probability(row.probability, digits)]
        if report.reference is not None:
            cells += [
                format_probability(row.reference or 0.0, digits),
                format_probability(row.difference or 0.0, digits),
            ]
        table.add_row(*cells)
    return table


def _histories_table(report: Report, digits: int) -> Table:
    table = Table(title="Consistency")
    table.add_column("family", style="cyan")
    table.add_column("consistent")
    table.add_column("max off-diagonal", justify="right")
    table.add_column("marginal deviation", justify="right")
    for summary in report.histories:
        table.add_row(
            summary.family,
            "[green]yes[/green]" if summary.consistent else "[red]no[/red]",
            format_probability(summary.max_off_diagonal, digits),
            format_probability(summary.marginal_deviation, digits),
        )
    return table


def emit_table(report: Report, digits: int = DEFAULT_SIGNIFICANT_DIGITS) -> str:
    """Plain-text rendering with no colour codes."""
    buffer = io.StringIO()
    console = Console(file=buffer, width=TABLE_WIDTH, color_system=None, force_terminal=False)
    console.print(build_table(report, digits))
    if report.histories:
        console.print(_histories_table(report, digits))
    footer = []
    if report.total is not None:
        footer.append(f"total: {format_probability(report.total, digits)}")
    if report.max_difference is not None:
        footer.append(f"max difference: {format_probability(report.max_difference, digits)}")
    if footer:
        console.print("  ".join(footer))
    return buffer.getvalue()


def emit(
    report: Report,
    output_format: OutputFormat = "table",
    digits: int = DEFAULT_SIGNIFICANT_DIGITS,
) -> str:
    """
    Render a report.

    Output is deterministic: rows keep the report's label order and every
    probability is printed with ``digits`` significant digits.
    """
    if output_format == "json":
        return emit_json(report, digits)
    if output_format == "csv":
        return emit_csv(report, digits)
    return emit_table(report, digits)


def parse_report(text: str) -> Report:
    """
    Read a JSON report produced by ``emit_json``.

    Raises:
        ScenarioParseError: syntax_error for invalid JSON, schema_error for an
            unknown format_version or malformed content.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(
            f"Invalid JSON: {e.msg}", code=ErrorCode.SYNTAX_ERROR, line=e.lineno, column=e.colno
        ) from e
    if not isinstance(data, dict) or data.get("format_version") != REPORT_FORMAT_VERSION:
        raise ScenarioParseError(
            f"Unsupported report format_version, expected {REPORT_FORMAT_VERSION}",
            code=ErrorCode.SCHEMA_ERROR,
            path="format_version",
        )
    payload = {k: v for k, v in data.items() if k != "format_version"}
    try:
        return Report.model_validate(payload)
    except ValidationError as e:
        raise ScenarioParseError(str(e), code=ErrorCode.SCHEMA_ERROR) from None
