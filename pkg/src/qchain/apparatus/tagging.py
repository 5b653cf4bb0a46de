"""Tagging decomposition: system substates multiplied by orthogonal probe states.

After a run of couplings the composite state is a sum over probe tag tuples,
each tag carrying the system substate obtained by evolving freely and
projecting at every coupling. Final probabilities follow by tracing out the
probes, and agree with a chain in which the probes are read out last.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from itertools import pairwise

import numpy as np
import numpy.typing as npt

from qchain.apparatus.couplings import PointerCompletion
from qchain.apparatus.events import (
    Event,
    ObserveEvent,
    OperatorEvent,
    assemble_chain,
    event_operator,
)
from qchain.constants import PRUNE_THRESHOLD
from qchain.errors import ErrorCode, InvalidInputError
from qchain.hilbert import CVector, as_operator, as_vector
from qchain.logging import get_logger
from qchain.models.chain import InitialState, MeasurementChain, Observable, projector
from qchain.models.distribution import Distribution
from qchain.models.space import CompositeSpace, FactorRole

logger = get_logger("apparatus.tagging")

TagTuple = tuple[int, ...]


def _check_order(events: Sequence[Event]) -> None:
    for first, second in pairwise(events):
        if second.sort_key() < first.sort_key():
            raise InvalidInputError(
                f"Event at time {second.time} follows an event at time {first.time}",
                code=ErrorCode.UNORDERED_EVENTS,
            )
        if second.sort_key() == first.sort_key():
            raise InvalidInputError(
                f"Events collide at time {first.time} without distinct sequence indices",
                code=ErrorCode.TIME_COLLISION,
            )


def tagged_final_state(
    space: CompositeSpace,
    state: npt.ArrayLike,
    events: Sequence[OperatorEvent],
    *,
    completion: PointerCompletion = PointerCompletion.MODULAR,
) -> CVector:
    """
    Apply a time-ordered list of unitaries and couplings to a composite state.

    Args:
        space: Composite space.
        state: Initial composite state, usually a product state.
        events: Events already sorted by (time, seq); observations are not allowed.
        completion: Pointer completion used for couplings.

    Raises:
        InvalidInputError: If events are out of order, collide, include an
            observation, or the state does not fit the space.
    """
    vector = as_vector(state)
    if vector.shape[0] != space.dim:
        raise InvalidInputError(
            f"State of dimension {vector.shape[0]} does not fit the composite ({space.dim})",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    _check_order(events)
    result = np.array(vector)
    for event in events:
        if isinstance(event, ObserveEvent):
            raise InvalidInputError(
                "Observations cannot be applied to a state; use a measurement chain",
                code=ErrorCode.INVALID_PARAMETERS,
            )
        result = event_operator(space, event, completion=completion) @ result
    result.setflags(write=False)
    return result


def _split_axes(
    space: CompositeSpace, state: npt.ArrayLike, labels: Sequence[str]
) -> npt.NDArray[np.complex128]:
    """State as a matrix: rows over ``labels`` (in order), columns over every other factor."""
    vector = as_vector(state)
    if vector.shape[0] != space.dim:
        raise InvalidInputError(
            f"State of dimension {vector.shape[0]} does not fit the composite ({space.dim})",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    positions = space.indices_of(labels)
    if len(set(positions)) != len(positions):
        raise InvalidInputError(
            f"Repeated factor in {tuple(labels)}", code=ErrorCode.DUPLICATE_LABEL
        )
    tensor = vector.reshape(space.dims)
    moved = np.moveaxis(tensor, positions, range(len(positions)))
    return moved.reshape(space.local_dim(labels), -1)


def tag_decomposition(
    space: CompositeSpace,
    state: npt.ArrayLike,
    probes: Sequence[str] | None = None,
) -> dict[TagTuple, CVector]:
    """
    Substates of the non-probe factors, keyed by probe tag tuple.

    Args:
        space: Composite space.
        state: Composite state.
        probes: Probe labels in the order tags are listed; defaults to every
            factor with the probe role, in composite order.

    Returns:
        Non-zero substates (unnormalized) over the remaining factors, in
        composite order.
    """
    labels = tuple(probes) if probes is not None else space.labels_with_role(FactorRole.PROBE)
    if not labels:
        raise InvalidInputError("No probe factors to decompose over", code=ErrorCode.UNKNOWN_LABEL)
    matrix = _split_axes(space, state, labels)
    probe_dims = tuple(space.factor(label).dim for label in labels)
    substates: dict[TagTuple, CVector] = {}
    for flat, row in enumerate(matrix):
        if float(np.linalg.norm(row)) <= PRUNE_THRESHOLD:
            continue
        tag = tuple(int(i) for i in np.unravel_index(flat, probe_dims))
        vector = np.array(row)
        vector.setflags(write=False)
        substates[tag] = vector
    logger.debug("Decomposed state into %d tagged branches", len(substates))
    return substates


def system_substates(
    s0: npt.ArrayLike, steps: Iterable[npt.ArrayLike | Observable]
) -> dict[TagTuple, CVector]:
    """
    Substates computed in the system space alone.

    Each step is either a unitary or a coupling partition; a partition
    splits every branch by its projectors. Tags count partitions
    chronologically and use class + 1, matching the pointer state d_{c+1}
    a coupling leaves behind.
    """
    branches: dict[TagTuple, npt.NDArray[np.complex128]] = {(): np.array(as_vector(s0))}
    for step in steps:
        if isinstance(step, Observable):
            branches = {
                (*tag, m + 1): projector(step, m) @ vector
                for tag, vector in branches.items()
                for m in range(step.num_classes)
            }
        else:
            unitary = as_operator(step)
            branches = {tag: unitary @ vector for tag, vector in branches.items()}
    for vector in branches.values():
        vector.setflags(write=False)
    return dict(branches)


def perceive_distribution(
    space: CompositeSpace,
    state: npt.ArrayLike,
    observable: Observable,
    factors: Sequence[str],
) -> Distribution:
    """
    Final-outcome probabilities with every other factor traced out.

    P(m) = tr[π_m ρ_red], ρ_red the reduced density operator on ``factors``.
    Summing over probe tags this equals Σ_tags ||π_m (tagged substate)||².

    Raises:
        InvalidInputError: If the observable does not act on the factors.
    """
    labels = tuple(factors)
    local_dim = space.local_dim(labels)
    if observable.dim != local_dim:
        raise InvalidInputError(
            f"Observable of dimension {observable.dim} does not act on factors {labels} "
            f"(dimension {local_dim})",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    matrix = _split_axes(space, state, labels)
    reduced = matrix @ matrix.conj().T
    probabilities = {
        (m,): float(np.real(np.trace(projector(observable, m) @ reduced)))
        for m in range(observable.num_classes)
    }
    return Distribution(
        axes=(observable.labels,), names=("final",), probabilities=probabilities
    )


def probe_readout_chain(
    space: CompositeSpace,
    state: npt.ArrayLike | InitialState,
    events: Sequence[Event],
    observable: Observable,
    factors: Sequence[str],
    *,
    probes: Sequence[str] | None = None,
    completion: PointerCompletion = PointerCompletion.MODULAR,
) -> MeasurementChain:
    """
    Equivalent chain in which every probe is read out after the last event.

    Probe readouts are non-degenerate in the pointer basis and precede the
    final observable, so the final column of its distribution is the
    perceived distribution of the tagged state.
    """
    initial = state if isinstance(state, InitialState) else InitialState.pure(state)
    labels = tuple(probes) if probes is not None else space.labels_with_role(FactorRole.PROBE)
    last = max((e.time for e in events), default=0.0)
    readouts: list[Event] = []
    for k, label in enumerate(labels, start=1):
        dim = space.factor(label).dim
        readouts.append(
            ObserveEvent(
                time=last + k,
                factors=(label,),
                observable=Observable.non_degenerate(
                    np.eye(dim), [f"{label}{j}" for j in range(dim)]
                ),
                name=label,
            )
        )
    readouts.append(
        ObserveEvent(
            time=last + len(labels) + 1,
            factors=tuple(factors),
            observable=observable,
            name="final",
        )
    )
    return assemble_chain(space, initial, [*events, *readouts], completion=completion)


def tags_by_probe(
    substates: Mapping[TagTuple, CVector], order: Sequence[int]
) -> dict[TagTuple, CVector]:
    """Reorder tag tuples, e.g. from composite order to coupling order."""
    return {tuple(tag[i] for i in order): vector for tag, vector in substates.items()}
