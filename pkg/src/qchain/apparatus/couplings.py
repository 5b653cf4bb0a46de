"""Probe couplings, memory registration and their reversal.

A probe with M+1 orthogonal pointer states d_0..d_M is entangled with a
target through a partition {π_c} of the target space:

    |d_0> ⊗ |s>  ->  Σ_c |d_{c+1}> ⊗ π_c |s>

The map is completed to a unitary on the whole probe space. The canonical
completion shifts the pointer modularly inside the block d_0..d_M; any
completion agreeing on the d_0 sector gives the same physics for protocols
that start probes in d_0.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qchain.errors import ErrorCode, InvalidInputError
from qchain.hilbert import COperator, embed_operator, ket_projector, shift_operator
from qchain.logging import get_logger
from qchain.models.chain import Observable, projector
from qchain.models.space import CompositeSpace

logger = get_logger("apparatus.couplings")


class PointerCompletion(str, Enum):
    """How a coupling acts on probe states other than d_0."""

    MODULAR = "modular"
    SWAP = "swap"


class CouplingSpec(BaseModel):
    """Probe, target factors, target partition and coupling time."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    probe: str = Field(..., min_length=1)
    targets: tuple[str, ...] = Field(..., min_length=1)
    partition: Observable
    time: float = 0.0

    @model_validator(mode="after")
    def validate_targets(self) -> CouplingSpec:
        if self.probe in self.targets:
            raise ValueError(f"Probe {self.probe!r} cannot also be a coupling target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"Repeated coupling target in {self.targets}")
        return self

    @property
    def num_classes(self) -> int:
        return self.partition.num_classes


def lift_observable(obs: Observable, space: CompositeSpace, labels: tuple[str, ...]) -> Observable:
    """
    Embed an observable on the named factors into the whole composite.

    The lifted basis is the local basis tensored with the computational basis
    of every other factor; each composite basis vector inherits the class of
    its local component.

    Raises:
        InvalidInputError: If the labels are unknown or the dimensions differ.
    """
    positions = space.indices_of(labels)
    local_dim = space.local_dim(labels)
    if obs.dim != local_dim:
        raise InvalidInputError(
            f"Observable of dimension {obs.dim} does not act on factors {labels} "
            f"(dimension {local_dim})",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    if len(labels) == len(space.factors) and positions == tuple(range(len(labels))):
        return obs
    basis = embed_operator(obs.basis, positions, space)
    assignment = np.asarray(obs.assignment)[space.local_indices(labels)]
    return Observable(
        basis=basis,
        classes=obs.classes,
        assignment=tuple(int(m) for m in assignment),
    )


def _pointer_map(
    probe_dim: int, steps: int, active: int, completion: PointerCompletion
) -> COperator:
    if completion is PointerCompletion.MODULAR:
        return shift_operator(probe_dim, steps, active=active)
    swap = np.eye(probe_dim, dtype=np.complex128)
    swap[[0, steps]] = swap[[steps, 0]]
    return swap


def _check_probe(space: CompositeSpace, spec: CouplingSpec) -> tuple[int, tuple[int, ...]]:
    probe_index = space.index_of(spec.probe)
    target_indices = space.indices_of(spec.targets)
    target_dim = space.local_dim(spec.targets)
    if spec.partition.dim != target_dim:
        raise InvalidInputError(
            f"Partition of dimension {spec.partition.dim} does not act on targets "
            f"{spec.targets} (dimension {target_dim})",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    probe_dim = space.factors[probe_index].dim
    if probe_dim < spec.num_classes + 1:
        raise InvalidInputError(
            f"Probe {spec.probe!r} has {probe_dim} states; {spec.num_classes} classes need "
            f"{spec.num_classes + 1}",
            code=ErrorCode.PROBE_TOO_SMALL,
        )
    return probe_index, target_indices


def coupling_unitary(
    space: CompositeSpace,
    spec: CouplingSpec,
    *,
    completion: PointerCompletion = PointerCompletion.MODULAR,
) -> COperator:
    """
    Unitary entangling the probe with the target partition.

    Acts as |d_0>|s> -> Σ_c |d_{c+1}> π_c|s>.

    Args:
        space: Composite containing the probe and targets.
        spec: Coupling description.
        completion: Action on pointer states other than d_0.

    Raises:
        InvalidInputError: If the probe has fewer than M+1 states or the
            partition does not match the targets.
    """
    probe_index, target_indices = _check_probe(space, spec)
    probe_dim = space.factors[probe_index].dim
    active = spec.num_classes + 1
    local = sum(
        np.kron(
            _pointer_map(probe_dim, c + 1, active, completion),
            projector(spec.partition, c),
        )
        for c in range(spec.num_classes)
    )
    logger.debug(
        "Coupling %s to %s with %d classes (%s completion)",
        spec.probe,
        ",".join(spec.targets),
        spec.num_classes,
        completion.value,
    )
    return embed_operator(local, (probe_index, *target_indices), space)


def reverse_coupling_unitary(
    space: CompositeSpace,
    spec: CouplingSpec,
    *,
    completion: PointerCompletion = PointerCompletion.MODULAR,
) -> COperator:
    """Adjoint of coupling_unitary: |d_{c+1}> π_c|s> -> |d_0> π_c|s>."""
    forward = coupling_unitary(space, spec, completion=completion)
    inverse = forward.conj().T.copy()
    inverse.setflags(write=False)
    return inverse


def register_memory_unitary(space: CompositeSpace, memory: str, probe: str) -> COperator:
    """
    Copy the pointer index into the memory: |μ_0>|d_j> -> |μ_j>|d_j>.

    Completed by a modular shift of the memory index, so registering twice
    advances the memory twice. The probe is left unchanged.

    Raises:
        InvalidInputError: If the memory has fewer states than the probe.
    """
    memory_index = space.index_of(memory)
    probe_index = space.index_of(probe)
    if memory_index == probe_index:
        raise InvalidInputError(
            f"Memory and probe must differ, got {memory!r} twice", code=ErrorCode.DIMENSION_MISMATCH
        )
    memory_dim = space.factors[memory_index].dim
    probe_dim = space.factors[probe_index].dim
    if memory_dim < probe_dim:
        raise InvalidInputError(
            f"Memory {memory!r} has {memory_dim} states, probe {probe!r} uses {probe_dim}",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    local = sum(
        np.kron(
            shift_operator(memory_dim, j),
            ket_projector(np.eye(probe_dim, dtype=np.complex128)[j]),
        )
        for j in range(probe_dim)
    )
    return embed_operator(local, (memory_index, probe_index), space)
