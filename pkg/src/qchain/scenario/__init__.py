"""Scenario documents: schema, parsing, execution and report output."""

from qchain.scenario.builder import BuiltScenario, build_chain, build_family
from qchain.scenario.builtins import BUILTINS, builtin_names, run_builtin
from qchain.scenario.emit import emit, parse_report, report_to_dict
from qchain.scenario.parser import dump_scenario, load_scenario, parse_scenario, validate_document
from qchain.scenario.runner import (
    HistoriesSummary,
    Report,
    ReportRow,
    RunSettings,
    check_histories,
    run,
)
from qchain.scenario.schema import ScenarioDocument

__all__ = [
    "BUILTINS",
    "BuiltScenario",
    "HistoriesSummary",
    "Report",
    "ReportRow",
    "RunSettings",
    "ScenarioDocument",
    "build_chain",
    "build_family",
    "builtin_names",
    "check_histories",
    "dump_scenario",
    "emit",
    "load_scenario",
    "parse_report",
    "parse_scenario",
    "report_to_dict",
    "run",
    "run_builtin",
    "validate_document",
]
