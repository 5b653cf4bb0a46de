"""Turn a validated scenario document into a space, a chain and history families."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

from qchain.apparatus import (
    CoupleEvent,
    CouplingSpec,
    Event,
    ObserveEvent,
    PointerCompletion,
    RegisterEvent,
    ReverseEvent,
    UnitaryEvent,
    assemble_chain,
    event_operator,
    lift_observable,
    order_events,
    product_state,
)
from qchain.errors import ErrorCode, ScenarioParseError
from qchain.hilbert import (
    COperator,
    basis_vector,
    haar_random_unitary,
    hadamard,
    identity,
    pauli_x,
    rotation,
    unitarity_deviation,
)
from qchain.histories import HistoryFamily, augment_with_observers
from qchain.logging import get_logger
from qchain.models.chain import EigenClass, InitialState, MeasurementChain, Observable
from qchain.models.space import CompositeSpace
from qchain.scenario.schema import (
    ClassDoc,
    ComplexEntry,
    CoupleEventDoc,
    LocalState,
    MatrixSpec,
    MixtureInitial,
    NamedMatrix,
    ObservableDoc,
    RegisterEventDoc,
    ReverseEventDoc,
    ScenarioDocument,
    UnitaryEventDoc,
)

logger = get_logger("scenario.builder")

PREPARATION_AXIS = "prep"


def _entry(value: ComplexEntry) -> complex:
    if isinstance(value, tuple | list):
        return complex(value[0], value[1])
    return complex(value)


def complex_array(entries: Sequence[ComplexEntry]) -> npt.NDArray[np.complex128]:
    return np.array([_entry(v) for v in entries], dtype=np.complex128)


def resolve_matrix(spec: MatrixSpec, path: str) -> npt.NDArray[np.complex128]:
    """
    Matrix of an explicit row list or a named builtin; unitarity is not checked here.

    Raises:
        ScenarioParseError: For ragged or non-square rows.
    """
    if isinstance(spec, NamedMatrix):
        if spec.builtin == "identity":
            return np.asarray(identity(spec.dim or 1))
        if spec.builtin == "hadamard":
            return np.asarray(hadamard())
        if spec.builtin == "pauli_x":
            return np.asarray(pauli_x())
        if spec.builtin == "rotation":
            return np.asarray(rotation(spec.theta or 0.0))
        return np.asarray(haar_random_unitary(spec.dim or 1, spec.seed or 0))
    widths = {len(row) for row in spec}
    if len(widths) != 1 or widths != {len(spec)}:
        raise ScenarioParseError(
            f"Matrix must be square, got {len(spec)} rows of widths {sorted(widths)}",
            code=ErrorCode.DIMENSION_MISMATCH,
            path=path,
        )
    return np.array([[_entry(v) for v in row] for row in spec], dtype=np.complex128)


def resolve_unitary(spec: MatrixSpec, dim: int, path: str, tol: float) -> COperator:
    """
    Resolve a matrix and check its size and unitarity.

    Raises:
        ScenarioParseError: On a size mismatch or a unitarity violation.
    """
    matrix = resolve_matrix(spec, path)
    if matrix.shape != (dim, dim):
        raise ScenarioParseError(
            f"Matrix of shape {matrix.shape} where dimension {dim} is needed",
            code=ErrorCode.DIMENSION_MISMATCH,
            path=path,
        )
    deviation = unitarity_deviation(matrix)
    if deviation >= tol:
        raise ScenarioParseError(
            f"unitarity violation, max deviation {deviation:.3e}",
            code=ErrorCode.NON_UNITARY,
            path=path,
        )
    matrix.setflags(write=False)
    return matrix


def _class_value(doc: ClassDoc, m: int) -> float:
    return float(m) if doc.value is None else doc.value


def resolve_observable(doc: ObservableDoc, dim: int, path: str, tol: float) -> Observable:
    """
    Observable of a document on a space of dimension ``dim``.

    Raises:
        ScenarioParseError: With code duplicate_label, incomplete_partition,
            index_out_of_range, dimension_mismatch or non_unitary.
    """
    labels = [c.label for c in doc.classes]
    if len(set(labels)) != len(labels):
        raise ScenarioParseError(
            f"Class labels must be distinct: {labels}", code=ErrorCode.DUPLICATE_LABEL, path=path
        )
    values = [_class_value(c, m) for m, c in enumerate(doc.classes)]
    if len(set(values)) != len(values):
        raise ScenarioParseError(
            f"Class values must be distinct: {values}",
            code=ErrorCode.INCOMPLETE_PARTITION,
            path=path,
        )
    classes = tuple(
        EigenClass(label=c.label, value=v) for c, v in zip(doc.classes, values, strict=True)
    )

    by_vectors = [c.vectors is not None for c in doc.classes]
    if any(by_vectors) and not all(by_vectors):
        raise ScenarioParseError(
            "Classes must all use states or all use vectors",
            code=ErrorCode.SCHEMA_ERROR,
            path=path,
        )
    if all(by_vectors):
        if doc.basis is not None:
            raise ScenarioParseError(
                "A basis cannot be combined with class vectors",
                code=ErrorCode.SCHEMA_ERROR,
                path=f"{path}.basis",
            )
        columns: list[npt.NDArray[np.complex128]] = []
        assignment: list[int] = []
        for m, c in enumerate(doc.classes):
            for k, entries in enumerate(c.vectors or []):
                vector = complex_array(entries)
                if vector.shape[0] != dim:
                    raise ScenarioParseError(
                        f"Vector of dimension {vector.shape[0]} where {dim} is needed",
                        code=ErrorCode.DIMENSION_MISMATCH,
                        path=f"{path}.classes[{m}].vectors[{k}]",
                    )
                columns.append(vector)
                assignment.append(m)
        if len(columns) != dim:
            raise ScenarioParseError(
                f"Classes hold {len(columns)} vectors for dimension {dim}",
                code=ErrorCode.INCOMPLETE_PARTITION,
                path=path,
            )
        basis = np.column_stack(columns)
        deviation = unitarity_deviation(basis)
        if deviation >= tol:
            raise ScenarioParseError(
                f"Class vectors are not orthonormal, max deviation {deviation:.3e}",
                code=ErrorCode.INCOMPLETE_PARTITION,
                path=path,
            )
        return Observable(basis=basis, classes=classes, assignment=tuple(assignment))

    basis = (
        resolve_unitary(doc.basis, dim, f"{path}.basis", tol)
        if doc.basis is not None
        else identity(dim)
    )
    slots = [-1] * dim
    for m, c in enumerate(doc.classes):
        for n in c.states or []:
            if not 0 <= n < dim:
                raise ScenarioParseError(
                    f"Basis index {n} out of range for dimension {dim}",
                    code=ErrorCode.INDEX_OUT_OF_RANGE,
                    path=f"{path}.classes[{m}].states",
                )
            if slots[n] != -1:
                raise ScenarioParseError(
                    f"Basis index {n} placed in two classes",
                    code=ErrorCode.INCOMPLETE_PARTITION,
                    path=f"{path}.classes[{m}].states",
                )
            slots[n] = m
    missing = [n for n, m in enumerate(slots) if m == -1]
    if missing:
        raise ScenarioParseError(
            f"Basis indices {missing} belong to no class",
            code=ErrorCode.INCOMPLETE_PARTITION,
            path=path,
        )
    empty = [c.label for c in doc.classes if not c.states]
    if empty:
        raise ScenarioParseError(
            f"Classes without basis vectors: {empty}",
            code=ErrorCode.INCOMPLETE_PARTITION,
            path=path,
        )
    return Observable(basis=basis, classes=classes, assignment=tuple(slots))


def build_space(doc: ScenarioDocument) -> CompositeSpace:
    return CompositeSpace.of(*((f.label, f.dim, f.role) for f in doc.factors))


def _local_states(states: Sequence[LocalState]) -> dict[str, npt.NDArray[np.complex128] | int]:
    local: dict[str, npt.NDArray[np.complex128] | int] = {}
    for state in states:
        if state.index is not None:
            local[state.factor] = state.index
        else:
            local[state.factor] = complex_array(state.vector or [])
    return local


def _local_vectors(
    space: CompositeSpace, local: dict[str, npt.NDArray[np.complex128] | int]
) -> list[npt.NDArray[np.complex128]]:
    vectors = []
    for factor in space.factors:
        value = local.get(factor.label, 0)
        vectors.append(
            np.asarray(basis_vector(factor.dim, value)) if isinstance(value, int) else value
        )
    return vectors


def build_initial(
    doc: ScenarioDocument, space: CompositeSpace
) -> tuple[InitialState, Observable | None]:
    """Initial state and, for a product state, its Kronecker preparation observable."""
    if isinstance(doc.initial, MixtureInitial):
        components = [
            (c.weight, product_state(space, _local_states(c.states)))
            for c in doc.initial.components
        ]
        return InitialState.mixed(components), None
    local = _local_states(doc.initial.states)
    preparation = Observable.preparation(_local_vectors(space, local))
    return InitialState.pure(product_state(space, local)), preparation


def build_events(doc: ScenarioDocument, space: CompositeSpace, tol: float) -> list[Event]:
    """
    Domain events in (time, seq) order; a reverse event undoes the probe's latest coupling.

    Raises:
        ScenarioParseError: If a reverse event has no earlier coupling of its probe.
    """
    indexed = sorted(
        enumerate(doc.events), key=lambda item: (item[1].time, item[1].seq or 0, item[0])
    )
    latest: dict[str, CouplingSpec] = {}
    events: list[Event] = []
    for index, event in indexed:
        path = f"events[{index}]"
        if isinstance(event, UnitaryEventDoc):
            matrix = resolve_unitary(
                event.matrix, space.local_dim(event.factors), f"{path}.matrix", tol
            )
            events.append(
                UnitaryEvent(
                    time=event.time, seq=event.seq, factors=tuple(event.factors), matrix=matrix
                )
            )
        elif isinstance(event, CoupleEventDoc):
            partition = resolve_observable(
                event.partition, space.local_dim(event.targets), f"{path}.partition", tol
            )
            spec = CouplingSpec(
                probe=event.probe,
                targets=tuple(event.targets),
                partition=partition,
                time=event.time,
            )
            latest[event.probe] = spec
            events.append(CoupleEvent.of(spec, seq=event.seq))
        elif isinstance(event, ReverseEventDoc):
            if event.probe not in latest:
                raise ScenarioParseError(
                    f"No earlier coupling of probe {event.probe!r} to reverse",
                    code=ErrorCode.UNKNOWN_LABEL,
                    path=f"{path}.probe",
                )
            events.append(
                ReverseEvent(time=event.time, seq=event.seq, coupling=latest[event.probe])
            )
        elif isinstance(event, RegisterEventDoc):
            events.append(
                RegisterEvent(
                    time=event.time, seq=event.seq, memory=event.memory, probe=event.probe
                )
            )
        else:
            observable = resolve_observable(
                event.observable, space.local_dim(event.factors), f"{path}.observable", tol
            )
            events.append(
                ObserveEvent(
                    time=event.time,
                    seq=event.seq,
                    factors=tuple(event.factors),
                    observable=observable,
                    name=event.name,
                )
            )
    return events


class BuiltScenario(BaseModel):
    """A document compiled to its composite, chain and outcome axis names."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: CompositeSpace
    chain: MeasurementChain
    axis_names: tuple[str, ...]


def observation_names(events: Sequence[Event]) -> tuple[str, ...]:
    """Name of every observation in order; unnamed ones are t1, t2, ..."""
    observes = [e for e in events if isinstance(e, ObserveEvent)]
    return tuple(e.name or f"t{k}" for k, e in enumerate(observes, start=1))


def build_chain(doc: ScenarioDocument, tol: float) -> BuiltScenario:
    """Compile the document's events into a measurement chain on its composite."""
    space = build_space(doc)
    initial, preparation = build_initial(doc, space)
    events = order_events(build_events(doc, space, tol))
    chain = assemble_chain(
        space,
        initial,
        events,
        preparation=preparation,
        completion=PointerCompletion(doc.options.completion),
    )
    logger.debug(
        "Built %r: %d factor(s), dim %d, %d event(s)",
        doc.name,
        len(space.factors),
        space.dim,
        len(events),
    )
    return BuiltScenario(
        space=space,
        chain=chain,
        axis_names=(PREPARATION_AXIS, *observation_names(events)),
    )


def build_family(doc: ScenarioDocument, index: int, tol: float) -> HistoryFamily:
    """
    History family of the projector_families entry at ``index``.

    Raises:
        ScenarioParseError: If the initial state is a mixture, or augmentation
            is requested on a scenario with several factors.
    """
    family = doc.projector_families[index]
    path = f"projector_families[{index}]"
    space = build_space(doc)
    initial, _ = build_initial(doc, space)
    if not initial.is_pure:
        raise ScenarioParseError(
            "History families need a pure initial state",
            code=ErrorCode.INVALID_STATE,
            path="initial",
        )
    events = [
        e for e in order_events(build_events(doc, space, tol)) if not isinstance(e, ObserveEvent)
    ]
    step_times = [step.time for step in family.steps]
    first = min([e.time for e in events] + step_times)
    times = [min(0.0, first - 1.0), *step_times]
    labels = tuple(family.factors) if family.factors is not None else space.labels
    completion = PointerCompletion(doc.options.completion)

    unitaries: list[COperator] = []
    projector_sets: list[Observable] = []
    for k, step in enumerate(family.steps):
        current = np.eye(space.dim, dtype=np.complex128)
        for event in events:
            if times[k] < event.time <= times[k + 1]:
                current = event_operator(space, event, completion=completion) @ current
        unitaries.append(current)
        local = resolve_observable(
            step.observable, space.local_dim(labels), f"{path}.steps[{k}].observable", tol
        )
        projector_sets.append(lift_observable(local, space, labels))

    bare = HistoryFamily(
        initial=initial.vector,
        times=tuple(times),
        unitaries=tuple(unitaries),
        projector_sets=tuple(projector_sets),
        space=space,
    )
    if not family.augment:
        return bare
    if len(space.factors) != 1:
        raise ScenarioParseError(
            "Only single-factor scenarios can be augmented with observers",
            code=ErrorCode.INVALID_CHAIN,
            path=f"{path}.augment",
        )
    return augment_with_observers(bare, family.augment, register=family.register_observers)
