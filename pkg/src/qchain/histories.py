"""Consistent-histories machinery: branch states, the Gram matrix and observer augmentation.

A history family is a chain of projector sets on a closed system. Each
outcome tuple (m_1, ..., m_L) owns a branch state
Π^L_{m_L} U_L ... Π^1_{m_1} U_1 |q_0>; the family is consistent when branches
of different tuples are orthogonal.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from functools import reduce

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, model_validator

from qchain.apparatus import (
    CouplingSpec,
    coupling_unitary,
    lift_observable,
    register_memory_unitary,
)
from qchain.constants import (
    DEFAULT_TOLERANCE,
    NORMALIZATION_TOLERANCE,
    SYSTEM_LABEL,
    UNITARITY_TOLERANCE,
    UNTAGGED_LABEL,
)
from qchain.engines.feynman import chain_distribution
from qchain.errors import ErrorCode, InvalidInputError
from qchain.hilbert import CVector, basis_vector, embed_operator, identity, unitarity_deviation
from qchain.logging import get_logger
from qchain.models._arrays import OperatorArray, VectorArray
from qchain.models.chain import EigenClass, InitialState, MeasurementChain, Observable
from qchain.models.distribution import Distribution, LabelTuple, OutcomeSequence
from qchain.models.space import CompositeSpace, FactorRole

logger = get_logger("histories")


class HistoryFamily(BaseModel):
    """
    Initial state, interval unitaries and a projector set at every time t_1..t_L.

    ``space`` defaults to a single system factor; augmented families carry
    their probes and memories in it.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    initial: VectorArray
    times: tuple[float, ...]
    unitaries: tuple[OperatorArray, ...]
    projector_sets: tuple[Observable, ...]
    space: CompositeSpace | None = None

    @model_validator(mode="after")
    def validate_family(self) -> HistoryFamily:
        dim = self.dim
        norm = float(np.linalg.norm(self.initial))
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"Initial state is not normalized (norm {norm:.15g})")
        steps = len(self.projector_sets)
        if steps < 1:
            raise ValueError("A history family needs at least one projector set")
        if len(self.times) != steps + 1 or len(self.unitaries) != steps:
            raise ValueError(
                f"{len(self.times)} times and {len(self.unitaries)} unitaries "
                f"for {steps} projector sets"
            )
        if any(b <= a for a, b in itertools.pairwise(self.times)):
            raise ValueError(f"Times must be strictly increasing: {self.times}")
        for step, (unitary, obs) in enumerate(
            zip(self.unitaries, self.projector_sets, strict=True), start=1
        ):
            if unitary.shape[0] != dim or obs.dim != dim:
                raise ValueError(f"Step {step} does not act on dimension {dim}")
            deviation = unitarity_deviation(unitary)
            if deviation >= UNITARITY_TOLERANCE:
                raise ValueError(f"U[{step}] is not unitary (max deviation {deviation:.3e})")
        if self.space is not None and self.space.dim != dim:
            raise ValueError(f"Space of dimension {self.space.dim} for a {dim}-dim state")
        return self

    @property
    def dim(self) -> int:
        return int(self.initial.shape[0])

    @property
    def steps(self) -> int:
        return len(self.projector_sets)

    @property
    def composite(self) -> CompositeSpace:
        if self.space is not None:
            return self.space
        return CompositeSpace.of((SYSTEM_LABEL, self.dim, FactorRole.SYSTEM))

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(f"t{step}" for step in range(1, self.steps + 1))

    def outcomes(self) -> list[OutcomeSequence]:
        """Every tuple (m_1, ..., m_L), in lexicographic order."""
        return list(itertools.product(*(range(obs.num_classes) for obs in self.projector_sets)))

    def labels_of(self, outcome: OutcomeSequence) -> LabelTuple:
        return tuple(
            obs.classes[m].label for obs, m in zip(self.projector_sets, outcome, strict=True)
        )


class DecoherenceMatrix(BaseModel):
    """Gram matrix G[a, b] = <branch(a)|branch(b)> over the family's outcome tuples."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    outcomes: tuple[OutcomeSequence, ...]
    labels: tuple[LabelTuple, ...]
    matrix: OperatorArray

    def diagonal(self) -> npt.NDArray[np.float64]:
        return np.real(np.diagonal(self.matrix)).astype(np.float64)

    def off_diagonal(self) -> npt.NDArray[np.float64]:
        magnitudes = np.abs(self.matrix)
        np.fill_diagonal(magnitudes, 0.0)
        return magnitudes


class ConsistencyVerdict(BaseModel):
    """Whether every off-diagonal Gram entry is below the tolerance."""

    model_config = ConfigDict(frozen=True)

    consistent: bool
    max_off_diagonal: float
    tolerance: float
    worst_pair: tuple[LabelTuple, LabelTuple] | None = None


class MarginalReport(BaseModel):
    """Summed joint distribution at the last time against a single-observer distribution."""

    model_config = ConfigDict(frozen=True)

    marginal: Distribution
    last: Distribution
    max_deviation: float

    def holds(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return self.max_deviation < tol


def branch_state(family: HistoryFamily, outcome: Sequence[int]) -> CVector:
    """
    Unnormalized branch Π^L_{m_L} U_L ... Π^1_{m_1} U_1 |q_0>.

    Raises:
        InvalidInputError: If the tuple has the wrong length or an index out of range.
    """
    if len(outcome) != family.steps:
        raise InvalidInputError(
            f"Outcome tuple of length {len(outcome)} for {family.steps} times",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    vector = np.asarray(family.initial)
    for unitary, obs, m in zip(family.unitaries, family.projector_sets, outcome, strict=True):
        vector = obs.projector(m) @ (unitary @ vector)
    return vector


def decoherence_matrix(family: HistoryFamily) -> DecoherenceMatrix:
    """Gram matrix of every branch state; its diagonal holds the CHA probabilities."""
    outcomes = family.outcomes()
    branches = np.column_stack([branch_state(family, outcome) for outcome in outcomes])
    logger.debug("Gram matrix over %d branches, dim %d", len(outcomes), family.dim)
    return DecoherenceMatrix(
        outcomes=tuple(outcomes),
        labels=tuple(family.labels_of(outcome) for outcome in outcomes),
        matrix=branches.conj().T @ branches,
    )


def consistency_check(family: HistoryFamily, tol: float = DEFAULT_TOLERANCE) -> ConsistencyVerdict:
    """
    Consistent iff every |<branch(a)|branch(b)>| with a != b is below tol.

    Full inner products are compared, not only their real parts.
    """
    gram = decoherence_matrix(family)
    off = gram.off_diagonal()
    if off.size <= 1:
        return ConsistencyVerdict(consistent=True, max_off_diagonal=0.0, tolerance=tol)
    a, b = (int(i) for i in np.unravel_index(int(np.argmax(off)), off.shape))
    worst = float(off[a, b])
    verdict = ConsistencyVerdict(
        consistent=worst < tol,
        max_off_diagonal=worst,
        tolerance=tol,
        worst_pair=(gram.labels[a], gram.labels[b]) if worst > 0.0 else None,
    )
    logger.info(
        "Consistency: max off-diagonal %.3e (%s at tol %.1e)",
        worst,
        "consistent" if verdict.consistent else "inconsistent",
        tol,
    )
    return verdict


def cha_probabilities(family: HistoryFamily) -> Distribution:
    """Gram diagonal as a distribution over (m_1, ..., m_L)."""
    gram = decoherence_matrix(family)
    return Distribution(
        axes=tuple(obs.labels for obs in family.projector_sets),
        names=family.axis_names,
        probabilities={
            outcome: float(p) for outcome, p in zip(gram.outcomes, gram.diagonal(), strict=True)
        },
    )


def family_chain(family: HistoryFamily) -> MeasurementChain:
    """Equivalent measurement chain: pure preparation, then the projector sets."""
    return MeasurementChain(
        times=family.times,
        unitaries=family.unitaries,
        observables=(Observable.from_state(family.initial), *family.projector_sets),
        initial=InitialState.pure(family.initial),
    )


def last_observer_distribution(family: HistoryFamily) -> Distribution:
    """Distribution of the final projector set when no one looks before t_L."""
    total = np.asarray(identity(family.dim))
    for unitary in family.unitaries:
        total = unitary @ total
    chain = MeasurementChain(
        times=(family.times[0], family.times[-1]),
        unitaries=(total,),
        observables=(Observable.from_state(family.initial), family.projector_sets[-1]),
        initial=InitialState.pure(family.initial),
    )
    distribution = chain_distribution(chain).marginal([1])
    return distribution.model_copy(update={"names": (family.axis_names[-1],)})


def marginal_check(full: Distribution, last: Distribution) -> MarginalReport:
    """
    Sum the joint distribution over every earlier time and compare with ``last``.

    Raises:
        InvalidInputError: If ``last`` has more than one axis.
    """
    if len(last.axes) != 1:
        raise InvalidInputError(
            f"Single-observer distribution must have one axis, got {len(last.axes)}",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    marginal = full.marginal([len(full.axes) - 1])
    deviation = marginal.max_abs_difference(last)
    logger.debug("Marginal deviation %.3e", deviation)
    return MarginalReport(marginal=marginal, last=last, max_deviation=deviation)


def _observer_labels(step: int) -> tuple[str, str]:
    return f"mu{step}", f"d{step}"


def _augmented_space(
    family: HistoryFamily, steps: Sequence[int], register: bool
) -> CompositeSpace:
    system = family.composite.factors[0]
    latest_first = sorted(steps, reverse=True)
    factors: list[tuple[str, int, FactorRole]] = []
    if register:
        for step in latest_first:
            size = family.projector_sets[step - 1].num_classes + 1
            factors.append((_observer_labels(step)[0], size, FactorRole.MEMORY))
    for step in latest_first:
        size = family.projector_sets[step - 1].num_classes + 1
        factors.append((_observer_labels(step)[1], size, FactorRole.PROBE))
    factors.append((system.label, system.dim, FactorRole.SYSTEM))
    return CompositeSpace.of(*factors)


def _tagged_observable(
    space: CompositeSpace, obs: Observable, step: int, register: bool
) -> Observable:
    """
    |μ_{m+1}><μ_{m+1}| ⊗ |d_{m+1}><d_{m+1}| ⊗ π_m at one augmented time.

    Every composite basis vector whose record does not match its system class
    lands in an extra ``untagged`` class that completes the partition.
    """
    memory, probe = _observer_labels(step)
    system = space.factors[-1].label
    lifted = lift_observable(obs, space, (system,))
    probe_digits = space.local_indices((probe,))
    memory_digits = space.local_indices((memory,)) if register else probe_digits
    untagged = obs.num_classes
    assignment = [
        m if probe_digits[n] == memory_digits[n] == m + 1 else untagged
        for n, m in enumerate(lifted.assignment)
    ]
    extra = EigenClass(label=UNTAGGED_LABEL, value=max(c.value for c in obs.classes) + 1.0)
    return Observable(
        basis=lifted.basis, classes=(*obs.classes, extra), assignment=tuple(assignment)
    )


def augment_with_observers(
    family: HistoryFamily,
    times: Sequence[int] | None = None,
    *,
    register: bool = True,
) -> HistoryFamily:
    """
    Bring a probe (and, with ``register``, a memory) into the closed system at chosen times.

    At an augmented step ℓ the interval unitary becomes R_ℓ C_ℓ (I ⊗ U_ℓ), C_ℓ
    coupling probe d_ℓ to the step's projector set and R_ℓ registering it in
    μ_ℓ; the projector set becomes the tagged one. Other steps keep their
    system projectors, lifted to the composite.

    Args:
        family: Bare family on a single system factor.
        times: Step indices 1..L to augment; all of them by default.
        register: Add a memory per probe. Without it the probes stay unregistered.

    Returns:
        The family on the enlarged composite, or ``family`` itself when no step is augmented.

    Raises:
        InvalidInputError: If the family is not bare or a step index is out of range.
        CapacityError: If the enlarged composite exceeds the dimension cap.
    """
    steps = sorted(set(range(1, family.steps + 1) if times is None else times))
    if not steps:
        return family
    if len(family.composite.factors) != 1:
        raise InvalidInputError(
            "Only a family on a single system factor can be augmented",
            code=ErrorCode.INVALID_CHAIN,
        )
    for step in steps:
        if not 1 <= step <= family.steps:
            raise InvalidInputError(
                f"Step {step} out of range 1..{family.steps}", code=ErrorCode.INDEX_OUT_OF_RANGE
            )

    space = _augmented_space(family, steps, register)
    system = space.factors[-1].label
    system_index = len(space.factors) - 1
    initial = reduce(
        np.kron, [basis_vector(f.dim, 0) for f in space.factors[:-1]] + [family.initial]
    )

    unitaries: list[npt.NDArray[np.complex128]] = []
    projector_sets: list[Observable] = []
    for step, (unitary, obs) in enumerate(
        zip(family.unitaries, family.projector_sets, strict=True), start=1
    ):
        operator = np.asarray(embed_operator(unitary, system_index, space))
        if step in steps:
            memory, probe = _observer_labels(step)
            spec = CouplingSpec(
                probe=probe, targets=(system,), partition=obs, time=family.times[step]
            )
            operator = np.asarray(coupling_unitary(space, spec)) @ operator
            if register:
                operator = np.asarray(register_memory_unitary(space, memory, probe)) @ operator
            projector_sets.append(_tagged_observable(space, obs, step, register))
        else:
            projector_sets.append(lift_observable(obs, space, (system,)))
        unitaries.append(operator)

    logger.info(
        "Augmented steps %s with %s; composite dimension %d",
        steps,
        "probes and memories" if register else "unregistered probes",
        space.dim,
    )
    return HistoryFamily(
        initial=initial,
        times=family.times,
        unitaries=tuple(unitaries),
        projector_sets=tuple(projector_sets),
        space=space,
    )


def plus_state_family() -> HistoryFamily:
    """
    |+> under identity dynamics, read in the computational basis and then in the ± basis.

    Branches (0,+) and (1,+) overlap by 1/4, so the family is inconsistent.
    """
    plus_minus = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    return HistoryFamily(
        initial=plus_minus[:, 0],
        times=(0.0, 1.0, 2.0),
        unitaries=(identity(2), identity(2)),
        projector_sets=(
            Observable.non_degenerate(identity(2), ["0", "1"]),
            Observable.non_degenerate(plus_minus, ["+", "-"]),
        ),
    )
