"""Time-tagged events on a composite and their compilation into a measurement chain."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from itertools import pairwise
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qchain.apparatus.couplings import (
    CouplingSpec,
    PointerCompletion,
    coupling_unitary,
    lift_observable,
    register_memory_unitary,
    reverse_coupling_unitary,
)
from qchain.constants import ORDERING_EPSILON
from qchain.errors import ErrorCode, InvalidInputError
from qchain.hilbert import COperator, CVector, as_vector, basis_vector, embed_operator, tensor_all
from qchain.logging import get_logger
from qchain.models._arrays import OperatorArray
from qchain.models.chain import InitialState, MeasurementChain, Observable
from qchain.models.space import CompositeSpace

logger = get_logger("apparatus.events")


class _TimedEvent(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    time: float
    seq: int | None = None

    def sort_key(self) -> tuple[float, int]:
        return (self.time, self.seq if self.seq is not None else 0)


class UnitaryEvent(_TimedEvent):
    """Unitary on a set of factors (system dynamics or an explicit joint interaction)."""

    kind: Literal["unitary"] = "unitary"
    factors: tuple[str, ...] = Field(..., min_length=1)
    matrix: OperatorArray


class CoupleEvent(_TimedEvent):
    """Probe-target coupling at the coupling's own time."""

    kind: Literal["couple"] = "couple"
    coupling: CouplingSpec

    @model_validator(mode="after")
    def validate_time(self) -> CoupleEvent:
        if self.coupling.time != self.time:
            raise ValueError(
                f"Coupling time {self.coupling.time} differs from event time {self.time}"
            )
        return self

    @classmethod
    def of(cls, coupling: CouplingSpec, seq: int | None = None) -> CoupleEvent:
        return cls(time=coupling.time, seq=seq, coupling=coupling)


class ReverseEvent(_TimedEvent):
    """Inverse of an earlier coupling."""

    kind: Literal["reverse"] = "reverse"
    coupling: CouplingSpec


class RegisterEvent(_TimedEvent):
    """Memory registration of a probe's pointer index."""

    kind: Literal["register"] = "register"
    memory: str
    probe: str


class ObserveEvent(_TimedEvent):
    """Perceived outcome: projective readout on a factor set."""

    kind: Literal["observe"] = "observe"
    factors: tuple[str, ...] = Field(..., min_length=1)
    observable: Observable
    name: str | None = None


Event = UnitaryEvent | CoupleEvent | ReverseEvent | RegisterEvent | ObserveEvent
OperatorEvent = UnitaryEvent | CoupleEvent | ReverseEvent | RegisterEvent


def order_events(events: Iterable[Event]) -> list[Event]:
    """
    Events sorted by (time, seq).

    Raises:
        InvalidInputError: If two events share both time and sequence index.
    """
    ordered = sorted(events, key=lambda e: e.sort_key())
    for first, second in pairwise(ordered):
        if first.sort_key() == second.sort_key():
            raise InvalidInputError(
                f"Events {first.kind} and {second.kind} collide at time {first.time} "
                "without distinct sequence indices",
                code=ErrorCode.TIME_COLLISION,
            )
    return ordered


def event_operator(
    space: CompositeSpace,
    event: OperatorEvent,
    *,
    completion: PointerCompletion = PointerCompletion.MODULAR,
) -> COperator:
    """
    Composite unitary of a single event.

    Raises:
        InvalidInputError: For observe events, which are not operators.
    """
    if isinstance(event, UnitaryEvent):
        return embed_operator(event.matrix, space.indices_of(event.factors), space)
    if isinstance(event, CoupleEvent):
        return coupling_unitary(space, event.coupling, completion=completion)
    if isinstance(event, ReverseEvent):
        return reverse_coupling_unitary(space, event.coupling, completion=completion)
    if isinstance(event, RegisterEvent):
        return register_memory_unitary(space, event.memory, event.probe)
    raise InvalidInputError(
        f"Event of kind {event.kind!r} has no operator", code=ErrorCode.INVALID_PARAMETERS
    )


def product_state(
    space: CompositeSpace, local: Mapping[str, npt.ArrayLike | int] | None = None
) -> CVector:
    """
    Product state over the composite; factors not listed start in |0>.

    Args:
        space: Composite space.
        local: Per-factor state given as a vector or a basis index.

    Raises:
        InvalidInputError: For unknown labels or wrongly sized vectors.
    """
    local = dict(local or {})
    for label in local:
        space.index_of(label)
    vectors: list[CVector] = []
    for factor in space.factors:
        value = local.get(factor.label, 0)
        if isinstance(value, int):
            vectors.append(basis_vector(factor.dim, value))
            continue
        vector = as_vector(value)
        if vector.shape[0] != factor.dim:
            raise InvalidInputError(
                f"State for {factor.label!r} has dimension {vector.shape[0]}, expected "
                f"{factor.dim}",
                code=ErrorCode.DIMENSION_MISMATCH,
            )
        vectors.append(vector)
    return tensor_all(vectors)


def assemble_chain(
    space: CompositeSpace,
    initial: InitialState,
    events: Sequence[Event],
    *,
    preparation: Observable | None = None,
    completion: PointerCompletion = PointerCompletion.MODULAR,
) -> MeasurementChain:
    """
    Compile a time-tagged event list into a measurement chain.

    Every observe event becomes a chain time; the product of all operators
    since the previous observation becomes the interval unitary. Observations
    that share a time tag are separated by a negligible offset, since only
    their order matters.

    Args:
        space: Composite the events act on.
        initial: Initial state over the composite.
        events: Events in any order; sorted by (time, seq).
        preparation: Q^0; defaults to a non-degenerate completion of a pure
            initial state, or the trivial observable for a mixture.
        completion: Pointer completion used for couplings.

    Raises:
        InvalidInputError: If there is no observation, events collide, or an
            event does not fit the space.
    """
    ordered = order_events(events)
    if not any(isinstance(e, ObserveEvent) for e in ordered):
        raise InvalidInputError("No observe event in the event list", code=ErrorCode.NO_OBSERVATION)
    if initial.dim != space.dim:
        raise InvalidInputError(
            f"Initial state of dimension {initial.dim} does not fit the composite ({space.dim})",
            code=ErrorCode.DIMENSION_MISMATCH,
        )

    if preparation is None:
        preparation = (
            Observable.from_state(initial.vector)
            if initial.is_pure
            else Observable.trivial(space.dim)
        )

    start = min(0.0, ordered[0].time - 1.0)
    times = [start]
    unitaries: list[COperator] = []
    observables = [preparation]
    current = np.eye(space.dim, dtype=np.complex128)
    pending = 0

    for event in ordered:
        if isinstance(event, ObserveEvent):
            times.append(max(event.time, times[-1] + ORDERING_EPSILON))
            unitaries.append(current)
            observables.append(lift_observable(event.observable, space, event.factors))
            current = np.eye(space.dim, dtype=np.complex128)
            pending = 0
        else:
            current = event_operator(space, event, completion=completion) @ current
            pending += 1

    if pending:
        logger.warning(
            "%d event(s) after the last observation do not affect outcome probabilities",
            pending,
        )
    logger.debug("Assembled chain with %d measurement(s) on dim %d", len(unitaries), space.dim)
    return MeasurementChain(
        times=tuple(times),
        unitaries=tuple(unitaries),
        observables=tuple(observables),
        initial=initial,
    )
