"""Bundled regression corpus of scenario documents."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor, as_completed
from importlib import resources
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from qchain.errors import (
    EXIT_NUMERICAL,
    ErrorCode,
    InvalidInputError,
    QchainError,
    ScenarioParseError,
)
from qchain.logging import get_logger, scenario_context
from qchain.scenario.parser import load_scenario
from qchain.scenario.runner import Report, RunSettings, check_histories, run

logger = get_logger("corpus")

INDEX_FILE = "index.json"

CorpusStatus = Literal["ok", "failed"]


class ExpectedRow(BaseModel):
    labels: tuple[str, ...]
    probability: float


class CorpusEntry(BaseModel):
    """Index entry: description, pinned probabilities and consistency verdicts."""

    description: str = ""
    expected: list[ExpectedRow] = Field(default_factory=list)
    consistent: dict[str, bool] = Field(default_factory=dict)


class CorpusResult(BaseModel):
    """Outcome of one corpus document."""

    model_config = ConfigDict(frozen=True)

    file: str
    name: str = ""
    status: CorpusStatus
    rows: int = 0
    checked: int = 0
    max_difference: float | None = None
    code: str | None = None
    message: str = ""
    exit_status: int = 0


def bundled_corpus_path() -> Path:
    """Directory holding the bundled corpus."""
    return Path(str(resources.files("qchain") / "corpus"))


def load_index(directory: Path | None = None) -> dict[str, CorpusEntry]:
    """
    Corpus index of a directory.

    Without an index.json every *.json file in the directory is listed with
    no pinned values.

    Raises:
        ScenarioParseError: If index.json is not valid JSON or has invalid entries.
        InvalidInputError: unreadable_input if index.json cannot be read.
    """
    directory = directory or bundled_corpus_path()
    index_path = directory / INDEX_FILE
    if not index_path.exists():
        return {
            path.name: CorpusEntry()
            for path in sorted(directory.glob("*.json"))
            if path.name != INDEX_FILE
        }

    logger.debug("Loading corpus index from %s", index_path)
    try:
        raw: dict[str, Any] = json.loads(index_path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ScenarioParseError(
            f"Corpus index {index_path} is not valid JSON: {e}", code=ErrorCode.SYNTAX_ERROR
        ) from e
    except OSError as e:
        raise InvalidInputError(
            f"Cannot read corpus index {index_path}: {e.strerror or e}",
            code=ErrorCode.UNREADABLE_INPUT,
        ) from e
    try:
        return TypeAdapter(dict[str, CorpusEntry]).validate_python(raw)
    except ValidationError as e:
        raise ScenarioParseError(
            f"Corpus index {index_path} has invalid entries: {e.error_count()} error(s)",
            path=".".join(str(part) for part in e.errors()[0]["loc"]),
        ) from e


def _check_expected(report: Report, entry: CorpusEntry, tol: float) -> tuple[int, str | None]:
    by_labels = {row.labels: row.probability for row in report.rows}
    for expected in entry.expected:
        got = by_labels.get(expected.labels, 0.0)
        if abs(got - expected.probability) > tol:
            return 0, (
                f"{' / '.join(expected.labels)}: expected {expected.probability:.12g}, "
                f"got {got:.12g}"
            )
    verdicts = {summary.family: summary.consistent for summary in report.histories}
    for family, consistent in entry.consistent.items():
        if verdicts.get(family) is not consistent:
            return 0, f"family {family!r}: expected consistent={consistent}"
    return len(entry.expected) + len(entry.consistent), None


def run_document(
    path: Path,
    entry: CorpusEntry | None = None,
    *,
    tol: float | None = None,
    settings: RunSettings | None = None,
) -> CorpusResult:
    """
    Run one document with both engines and compare it against its pinned values.

    Errors are captured in the result rather than raised.
    """
    with scenario_context(path.name):
        return _run_document(path, entry or CorpusEntry(), tol, settings or RunSettings())


def _run_document(
    path: Path, entry: CorpusEntry, tol: float | None, settings: RunSettings
) -> CorpusResult:
    try:
        doc = load_scenario(path, tol=settings.unitarity_tolerance)
        if doc.query.kind == "histories_check":
            report = check_histories(doc, tol=tol, settings=settings)
        else:
            report = run(doc, engine="both", tol=tol, settings=settings)
    except QchainError as e:
        logger.warning("Corpus document %s failed: %s", path.name, e)
        return CorpusResult(
            file=path.name,
            status="failed",
            code=e.code.value,
            message=str(e),
            exit_status=e.exit_status,
        )

    checked, mismatch = _check_expected(report, entry, settings.equivalence_tolerance)
    if mismatch is not None:
        logger.warning("Corpus document %s disagrees with its pinned values", path.name)
        return CorpusResult(
            file=path.name,
            name=report.name,
            status="failed",
            rows=len(report.rows),
            max_difference=report.max_difference,
            code=ErrorCode.NUMERICAL_INVARIANT.value,
            message=mismatch,
            exit_status=EXIT_NUMERICAL,
        )
    return CorpusResult(
        file=path.name,
        name=report.name,
        status="ok",
        rows=len(report.rows),
        checked=checked,
        max_difference=report.max_difference,
    )


def run_corpus(
    directory: Path | None = None,
    *,
    workers: int = 1,
    tol: float | None = None,
    settings: RunSettings | None = None,
) -> list[CorpusResult]:
    """
    Run every indexed document, fanning out across ``workers`` threads.

    Results are sorted by file name, whatever order the workers finish in.
    """
    directory = directory or bundled_corpus_path()
    index = load_index(directory)
    logger.info("Running %d corpus document(s) from %s", len(index), directory)
    if workers <= 1:
        results = [
            run_document(directory / name, entry, tol=tol, settings=settings)
            for name, entry in index.items()
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(run_document, directory / name, entry, tol=tol, settings=settings)
                for name, entry in index.items()
            ]
            results = [future.result() for future in as_completed(futures)]
    return sorted(results, key=lambda result: result.file)
