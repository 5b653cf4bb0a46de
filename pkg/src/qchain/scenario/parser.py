"""Scenario JSON parser and validator."""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from qchain.apparatus import CoupleEvent
from qchain.constants import NORMALIZATION_TOLERANCE, UNITARITY_TOLERANCE
from qchain.errors import CapacityError, ErrorCode, InvalidInputError, ScenarioParseError
from qchain.logging import get_logger
from qchain.models.space import CompositeSpace
from qchain.scenario.builder import (
    build_events,
    build_space,
    complex_array,
    resolve_observable,
)
from qchain.scenario.schema import (
    CoupleEventDoc,
    LocalState,
    MixtureInitial,
    ObserveEventDoc,
    RegisterEventDoc,
    ReverseEventDoc,
    ScenarioDocument,
    UnitaryEventDoc,
)

logger = get_logger("scenario.parser")


def _format_loc(loc: Sequence[int | str]) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path


def _check_labels(space: CompositeSpace, labels: Sequence[str], path: str) -> None:
    known = set(space.labels)
    for label in labels:
        if label not in known:
            raise ScenarioParseError(
                f"Unknown factor label {label!r}", code=ErrorCode.UNKNOWN_LABEL, path=path
            )
    if len(set(labels)) != len(labels):
        raise ScenarioParseError(
            f"Factor listed twice in {list(labels)}", code=ErrorCode.DUPLICATE_LABEL, path=path
        )


def _check_local_states(space: CompositeSpace, states: Sequence[LocalState], path: str) -> None:
    _check_labels(space, [s.factor for s in states], path)
    for k, state in enumerate(states):
        where = f"{path}[{k}]"
        dim = space.factor(state.factor).dim
        if state.index is not None:
            if not 0 <= state.index < dim:
                raise ScenarioParseError(
                    f"State index {state.index} out of range for {state.factor!r} (dim {dim})",
                    code=ErrorCode.INDEX_OUT_OF_RANGE,
                    path=f"{where}.index",
                )
            continue
        vector = complex_array(state.vector or [])
        if vector.shape[0] != dim:
            raise ScenarioParseError(
                f"State for {state.factor!r} has dimension {vector.shape[0]}, expected {dim}",
                code=ErrorCode.DIMENSION_MISMATCH,
                path=f"{where}.vector",
            )
        norm = float(np.linalg.norm(vector))
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            raise ScenarioParseError(
                f"State for {state.factor!r} is not normalized (norm {norm:.15g})",
                code=ErrorCode.INVALID_STATE,
                path=f"{where}.vector",
            )


def _check_initial(doc: ScenarioDocument, space: CompositeSpace) -> None:
    if not isinstance(doc.initial, MixtureInitial):
        _check_local_states(space, doc.initial.states, "initial.states")
        return
    for k, component in enumerate(doc.initial.components):
        _check_local_states(space, component.states, f"initial.components[{k}].states")
    total = sum(c.weight for c in doc.initial.components)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise ScenarioParseError(
            f"Mixture weights sum to {total:.15g}, expected 1",
            code=ErrorCode.INVALID_STATE,
            path="initial.components",
        )


def _check_event_labels(doc: ScenarioDocument, space: CompositeSpace) -> None:
    for index, event in enumerate(doc.events):
        path = f"events[{index}]"
        if isinstance(event, UnitaryEventDoc | ObserveEventDoc):
            _check_labels(space, event.factors, f"{path}.factors")
        elif isinstance(event, CoupleEventDoc):
            _check_labels(space, [event.probe, *event.targets], f"{path}.targets")
        elif isinstance(event, ReverseEventDoc):
            _check_labels(space, [event.probe], f"{path}.probe")
        elif isinstance(event, RegisterEventDoc):
            _check_labels(space, [event.memory, event.probe], path)
            memory_dim = space.factor(event.memory).dim
            probe_dim = space.factor(event.probe).dim
            if memory_dim < probe_dim:
                raise ScenarioParseError(
                    f"Memory {event.memory!r} has {memory_dim} states, probe {event.probe!r} "
                    f"uses {probe_dim}",
                    code=ErrorCode.DIMENSION_MISMATCH,
                    path=f"{path}.memory",
                )


def _check_times(doc: ScenarioDocument) -> None:
    seen: dict[tuple[float, int], int] = {}
    for index, event in enumerate(doc.events):
        key = (event.time, event.seq if event.seq is not None else 0)
        if key in seen:
            raise ScenarioParseError(
                f"Events {seen[key]} and {index} share time {event.time} without distinct "
                "sequence indices",
                code=ErrorCode.TIME_COLLISION,
                path=f"events[{index}].time",
            )
        seen[key] = index


def _check_query(doc: ScenarioDocument, space: CompositeSpace, tol: float) -> None:
    observes = sorted(
        (
            (event.time, event.seq or 0, index, event)
            for index, event in enumerate(doc.events)
            if isinstance(event, ObserveEventDoc)
        ),
        key=lambda item: item[:3],
    )
    if not observes:
        if doc.query.kind != "histories_check":
            raise ScenarioParseError(
                "No observe event in the event list", code=ErrorCode.NO_OBSERVATION, path="events"
            )
        return
    if doc.query.kind == "return_probability" and doc.query.label is not None:
        _, _, index, last = observes[-1]
        observable = resolve_observable(
            last.observable, space.local_dim(last.factors), f"events[{index}].observable", tol
        )
        if doc.query.label not in observable.labels:
            raise ScenarioParseError(
                f"Final observation has no class {doc.query.label!r}; "
                f"classes are {list(observable.labels)}",
                code=ErrorCode.UNKNOWN_LABEL,
                path="query.label",
            )


def _check_families(doc: ScenarioDocument, space: CompositeSpace, tol: float) -> None:
    for index, family in enumerate(doc.projector_families):
        path = f"projector_families[{index}]"
        labels = family.factors if family.factors is not None else list(space.labels)
        _check_labels(space, labels, f"{path}.factors")
        times = [step.time for step in family.steps]
        for k in range(1, len(times)):
            if times[k] <= times[k - 1]:
                raise ScenarioParseError(
                    f"Step times must increase strictly, got {times}",
                    code=ErrorCode.TIME_COLLISION,
                    path=f"{path}.steps[{k}].time",
                )
        for k, step in enumerate(family.steps):
            resolve_observable(
                step.observable, space.local_dim(labels), f"{path}.steps[{k}].observable", tol
            )
        for step_index in family.augment:
            if not 1 <= step_index <= len(family.steps):
                raise ScenarioParseError(
                    f"Augmented step {step_index} out of range 1..{len(family.steps)}",
                    code=ErrorCode.INDEX_OUT_OF_RANGE,
                    path=f"{path}.augment",
                )
        if family.augment and len(space.factors) != 1:
            raise ScenarioParseError(
                "Only single-factor scenarios can be augmented with observers",
                code=ErrorCode.INVALID_CHAIN,
                path=f"{path}.augment",
            )


def validate_document(doc: ScenarioDocument, tol: float = UNITARITY_TOLERANCE) -> None:
    """
    Semantic checks on a structurally valid document.

    Raises:
        ScenarioParseError: With the failing check's code and the document path.
        CapacityError: If the composite exceeds the dimension cap.
    """
    labels = [f.label for f in doc.factors]
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        raise ScenarioParseError(
            f"Duplicate factor labels: {duplicates}", code=ErrorCode.DUPLICATE_LABEL, path="factors"
        )
    space = build_space(doc)
    _check_initial(doc, space)
    _check_event_labels(doc, space)
    _check_times(doc)
    try:
        events = build_events(doc, space, tol)
    except (ScenarioParseError, CapacityError):
        raise
    except InvalidInputError as e:
        raise ScenarioParseError(e.message, code=e.code, path="events") from e
    except ValidationError as e:
        raise ScenarioParseError(str(e), code=ErrorCode.SCHEMA_ERROR, path="events") from e
    for event in events:
        if isinstance(event, CoupleEvent):
            spec = event.coupling
            probe_dim = space.factor(spec.probe).dim
            if probe_dim < spec.num_classes + 1:
                raise ScenarioParseError(
                    f"Probe {spec.probe!r} has {probe_dim} states; {spec.num_classes} classes "
                    f"need {spec.num_classes + 1}",
                    code=ErrorCode.PROBE_TOO_SMALL,
                    path="events",
                )
    _check_query(doc, space, tol)
    _check_families(doc, space, tol)


def parse_scenario(text: str, *, tol: float = UNITARITY_TOLERANCE) -> ScenarioDocument:
    """
    Parse and fully validate a scenario document.

    Args:
        text: UTF-8 JSON text.
        tol: Unitarity tolerance for every matrix in the document.

    Returns:
        The validated document.

    Raises:
        ScenarioParseError: syntax_error with line and column, schema_error with
            the offending path, or a semantic error code.
        CapacityError: If the composite exceeds the dimension cap.
    """
    try:
        data: Any = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(
            f"Invalid JSON: {e.msg}", code=ErrorCode.SYNTAX_ERROR, line=e.lineno, column=e.colno
        ) from e

    try:
        doc = ScenarioDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        more = f" (and {e.error_count() - 1} more)" if e.error_count() > 1 else ""
        raise ScenarioParseError(
            f"{first['msg']}{more}",
            code=ErrorCode.SCHEMA_ERROR,
            path=_format_loc(first["loc"]) or "$",
        ) from None

    validate_document(doc, tol)
    logger.debug(
        "Parsed scenario %r: %d factor(s), %d event(s), query %s",
        doc.name,
        len(doc.factors),
        len(doc.events),
        doc.query.kind,
    )
    return doc


def load_scenario(path: Path | str, *, tol: float = UNITARITY_TOLERANCE) -> ScenarioDocument:
    """
    Read and parse a scenario file.

    Raises:
        ScenarioParseError: syntax_error if the file is not UTF-8 text, or any
            parse and validation error of its content.
        InvalidInputError: unreadable_input if the file is missing, is a
            directory or cannot be opened.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ScenarioParseError(
            f"Scenario file {path} is not valid UTF-8 (byte {e.start})",
            code=ErrorCode.SYNTAX_ERROR,
        ) from e
    except FileNotFoundError as e:
        raise InvalidInputError(
            f"Scenario file not found: {path}", code=ErrorCode.UNREADABLE_INPUT
        ) from e
    except OSError as e:
        raise InvalidInputError(
            f"Cannot read scenario file {path}: {e.strerror or e}",
            code=ErrorCode.UNREADABLE_INPUT,
        ) from e
    return parse_scenario(text, tol=tol)


def dump_scenario(doc: ScenarioDocument) -> str:
    """Canonical JSON text; parsing it back gives an equal document."""
    data = doc.model_dump(mode="json", by_alias=True, exclude_none=True)
    return json.dumps(data, indent=2) + "\n"
