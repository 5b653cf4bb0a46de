"""Tests for running scenario documents and rendering their reports."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest

from qchain.config import AppConfig, NumericsConfig
from qchain.errors import ErrorCode, InvalidInputError, NumericalInvariantError, ScenarioParseError
from qchain.scenario import (
    Report,
    RunSettings,
    check_histories,
    emit,
    load_scenario,
    parse_report,
    parse_scenario,
    report_to_dict,
    run,
)
from qchain.scenario.emit import format_probability
from qchain.scenario.runner import (
    check_agreement,
    check_normalization,
    compare_rows,
    report_from_results,
)


def probabilities(report: Report) -> dict[tuple[str, ...], float]:
    return {row.labels: row.probability for row in report.rows}


class TestRun:
    """Tests for run()."""

    def test_hadamard_readout(self, qubit_document: dict[str, Any]) -> None:
        """H|0> read out once gives a fair coin."""
        report = run(parse_scenario(json.dumps(qubit_document)))
        assert report.axes == ("t1",)
        assert report.engine == "feynman"
        assert report.reference is None
        assert report.max_difference is None
        assert [row.labels for row in report.rows] == [("0",), ("1",)]
        assert probabilities(report)[("0",)] == pytest.approx(0.5)
        assert report.total == pytest.approx(1.0)

    def test_both_engines(self, qubit_document: dict[str, Any]) -> None:
        """With both engines every row carries the evolution value."""
        report = run(parse_scenario(json.dumps(qubit_document)), engine="both")
        assert report.reference == "evolution"
        assert report.max_difference is not None
        assert report.max_difference < 1e-12
        assert all(row.difference is not None for row in report.rows)

    def test_document_engine_option(self, qubit_document: dict[str, Any]) -> None:
        """The document's engine wins over the settings."""
        qubit_document["options"] = {"engine": "evolution"}
        report = run(parse_scenario(json.dumps(qubit_document)), settings=RunSettings())
        assert report.engine == "evolution"

    def test_argument_engine_wins(self, qubit_document: dict[str, Any]) -> None:
        qubit_document["options"] = {"engine": "evolution"}
        report = run(parse_scenario(json.dumps(qubit_document)), engine="feynman")
        assert report.engine == "feynman"

    def test_probe_readout(self, probe_document: dict[str, Any]) -> None:
        """The probe reads |0.6|² and |0.8|² on its pointer states."""
        report = run(parse_scenario(json.dumps(probe_document)), engine="both")
        assert report.axes == ("D",)
        values = probabilities(report)
        assert values[("d1",)] == pytest.approx(0.36, abs=1e-12)
        assert values[("d2",)] == pytest.approx(0.64, abs=1e-12)
        assert values.get(("d0",), 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_return_probability(self, probe_document: dict[str, Any]) -> None:
        """A return_probability query keeps only the requested final class."""
        probe_document["query"] = {"kind": "return_probability", "label": "d2"}
        report = run(parse_scenario(json.dumps(probe_document)))
        assert report.query == "return_probability"
        assert [row.labels for row in report.rows] == [("d2",)]
        assert report.rows[0].probability == pytest.approx(0.64)

    def test_return_probability_default_label(self, probe_document: dict[str, Any]) -> None:
        """Without a label the first class of the final observation is reported."""
        probe_document["query"] = {"kind": "return_probability"}
        report = run(parse_scenario(json.dumps(probe_document)))
        assert [row.labels for row in report.rows] == [("d0",)]
        assert report.rows[0].probability == pytest.approx(0.0, abs=1e-12)

    def test_pruning(self, qubit_document: dict[str, Any]) -> None:
        """Pruning negligible branches leaves the distribution intact."""
        settings = RunSettings(prune_below=1e-15)
        report = run(parse_scenario(json.dumps(qubit_document)), settings=settings)
        assert probabilities(report)[("1",)] == pytest.approx(0.5)

    def test_settings_from_config(self) -> None:
        config = AppConfig(numerics=NumericsConfig(engine="both", tolerance=1e-8))
        settings = RunSettings.from_config(config)
        assert settings.engine == "both"
        assert settings.tolerance == 1e-8

    def test_consistency_tolerance_leaves_unitarity_check(
        self, qubit_document: dict[str, Any]
    ) -> None:
        """A loose consistency tolerance does not admit non-unitary matrices."""
        qubit_document["events"][0]["matrix"] = [[0.7071, 0.7071], [0.7071, -0.7071]]
        doc = parse_scenario(json.dumps(qubit_document), tol=1e-4)
        with pytest.raises(ScenarioParseError, match="max deviation") as exc_info:
            run(doc, tol=1e-3)
        assert exc_info.value.code is ErrorCode.NON_UNITARY

        settings = RunSettings(unitarity_tolerance=1e-4, normalization_tolerance=1e-3)
        report = run(doc, tol=1e-3, settings=settings)
        assert probabilities(report)[("0",)] == pytest.approx(0.5, abs=1e-4)

    def test_unitarity_tolerance_from_config(self) -> None:
        config = AppConfig(numerics=NumericsConfig(tolerance=1e-3, unitarity_tolerance=1e-6))
        settings = RunSettings.from_config(config)
        assert settings.tolerance == 1e-3
        assert settings.unitarity_tolerance == 1e-6

    def test_histories_query_dispatches(self, corpus_dir: Path) -> None:
        """run() hands histories_check documents to check_histories."""
        report = run(load_scenario(corpus_dir / "plus-histories.json"))
        assert report.query == "histories_check"
        assert report.engine == "histories"


class TestCheckHistories:
    """Tests for check_histories()."""

    def test_plus_families(self, corpus_dir: Path) -> None:
        """The bare family is inconsistent; adding an observer at t1 fixes it."""
        report = check_histories(load_scenario(corpus_dir / "plus-histories.json"))
        verdicts = {h.family: h.consistent for h in report.histories}
        assert verdicts == {"bare": False, "observed": True, "unregistered": True}
        assert report.axes == ("family", "history")
        values = probabilities(report)
        assert values[("bare", "0 -> +")] == pytest.approx(0.25)
        assert values[("observed", "1 -> -")] == pytest.approx(0.25)
        assert report.max_difference is not None
        assert report.max_difference < 1e-12

    def test_marginal_deviation(self, corpus_dir: Path) -> None:
        """Only the bare family's last-time marginal misses the late observer."""
        report = check_histories(load_scenario(corpus_dir / "plus-histories.json"))
        deviations = {h.family: h.marginal_deviation for h in report.histories}
        assert deviations["bare"] == pytest.approx(0.5)
        assert deviations["observed"] == pytest.approx(0.0, abs=1e-10)

    def test_missing_families(self, qubit_document: dict[str, Any]) -> None:
        doc = parse_scenario(json.dumps(qubit_document))
        with pytest.raises(InvalidInputError, match="no projector_families") as exc_info:
            check_histories(doc)
        assert exc_info.value.code is ErrorCode.MISSING_PROJECTOR_FAMILIES


class TestRunnerChecks:
    """Row comparison and the numerical checks."""

    def test_compare_rows_clamps(self) -> None:
        """Round-off negatives print as zero."""
        rows, worst = compare_rows({("a",): -1e-13, ("b",): 1.0})
        assert rows[0].probability == 0.0
        assert worst is None

    def test_compare_rows_with_reference(self) -> None:
        """Keys missing on one side count as zero."""
        rows, worst = compare_rows({("a",): 0.5}, {("a",): 0.25, ("b",): 0.75})
        assert [row.labels for row in rows] == [("a",), ("b",)]
        assert rows[1].probability == 0.0
        assert worst == pytest.approx(0.75)

    def test_normalization(self) -> None:
        check_normalization("ok", 1.0 + 1e-12, 1e-9)
        with pytest.raises(NumericalInvariantError, match="sum to") as exc_info:
            check_normalization("bad", 0.9, 1e-9)
        assert exc_info.value.exit_status == 4

    def test_agreement(self) -> None:
        check_agreement("ok", None, 1e-9, "Engines")
        with pytest.raises(NumericalInvariantError, match="Engines differ"):
            check_agreement("bad", 1e-3, 1e-9, "Engines")

    def test_closed_form_mismatch(self) -> None:
        with pytest.raises(NumericalInvariantError, match="Closed form and engine"):
            report_from_results("x", ("t1",), {("a",): 1.0}, {("a",): 0.5})

    def test_weightless_extra_outcomes_dropped(self) -> None:
        """Zero-probability outcomes the closed form lacks get no row."""
        report = report_from_results(
            "x", ("t1",), {("yes",): 1.0, ("blank",): 0.0}, {("yes",): 1.0}
        )
        assert [row.labels for row in report.rows] == [("yes",)]

    def test_weighted_extra_outcomes_fail(self) -> None:
        """An outcome the closed form lacks still counts when it carries weight."""
        with pytest.raises(NumericalInvariantError, match="Closed form and engine"):
            report_from_results("x", ("t1",), {("yes",): 0.9, ("blank",): 0.1}, {("yes",): 0.9})


class TestEmit:
    """Table, JSON and CSV rendering."""

    @pytest.fixture
    def report(self, qubit_document: dict[str, Any]) -> Report:
        return run(parse_scenario(json.dumps(qubit_document)))

    def test_csv(self, report: Report) -> None:
        assert emit(report, "csv") == "t1,probability\n0,0.5\n1,0.5\n"

    def test_csv_with_reference(self, qubit_document: dict[str, Any]) -> None:
        report = run(parse_scenario(json.dumps(qubit_document)), engine="both")
        header = emit(report, "csv").splitlines()[0]
        assert header == "t1,probability,evolution,difference"

    def test_empty_csv(self) -> None:
        """A report without rows is just the header."""
        empty = Report(name="empty", query="joint_distribution", engine="feynman", axes=("t1",))
        assert emit(empty, "csv") == "t1,probability\n"

    def test_json(self, report: Report) -> None:
        data = json.loads(emit(report, "json"))
        assert data["format_version"] == 1
        assert data["axes"] == ["t1"]
        assert data["rows"][0] == {"labels": ["0"], "probability": 0.5}
        assert list(data) == list(report_to_dict(report))

    def test_json_parses_back(self, report: Report) -> None:
        parsed = parse_report(emit(report, "json"))
        assert [row.labels for row in parsed.rows] == [row.labels for row in report.rows]
        for got, expected in zip(parsed.rows, report.rows, strict=True):
            assert got.probability == pytest.approx(expected.probability, abs=1e-12)
        assert parsed.axes == report.axes
        assert parsed.name == report.name

    def test_parse_report_version(self, report: Report) -> None:
        data = report_to_dict(report)
        data["format_version"] = 99
        with pytest.raises(ScenarioParseError) as exc_info:
            parse_report(json.dumps(data))
        assert exc_info.value.code is ErrorCode.SCHEMA_ERROR

    def test_parse_report_syntax(self) -> None:
        with pytest.raises(ScenarioParseError) as exc_info:
            parse_report("{")
        assert exc_info.value.code is ErrorCode.SYNTAX_ERROR

    def test_table(self, report: Report) -> None:
        """Tables are plain text with a total footer."""
        text = emit(report, "table")
        assert "probability" in text
        assert "total: 1" in text
        assert "\x1b[" not in text

    def test_significant_digits(self) -> None:
        assert format_probability(1 / 3, 4) == "0.3333"
        assert format_probability(0.36) == "0.36"

    def test_deterministic(self, report: Report) -> None:
        assert emit(report, "json") == emit(report, "json")
