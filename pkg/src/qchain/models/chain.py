"""Observables, initial states and measurement chains."""

from __future__ import annotations

from collections.abc import Sequence
from functools import reduce

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qchain.constants import NORMALIZATION_TOLERANCE, PREPARED_LABEL, UNITARITY_TOLERANCE
from qchain.errors import ErrorCode, InvalidInputError
from qchain.hilbert import COperator, CVector, complete_basis, unitarity_deviation
from qchain.models._arrays import OperatorArray, VectorArray


class EigenClass(BaseModel):
    """A labelled eigenvalue Q_m."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1)
    value: float


class Observable(BaseModel):
    """
    Eigenbasis plus an explicit degeneracy partition.

    Column n of ``basis`` is |q_n>; ``assignment[n]`` is the index of the
    eigenvalue class holding it. Degeneracy is declared, never inferred from
    numerically equal eigenvalues.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    basis: OperatorArray
    classes: tuple[EigenClass, ...] = Field(..., min_length=1)
    assignment: tuple[int, ...]

    @model_validator(mode="after")
    def validate_partition(self) -> Observable:
        deviation = unitarity_deviation(self.basis)
        if deviation >= UNITARITY_TOLERANCE:
            raise ValueError(f"Observable basis is not unitary (max deviation {deviation:.3e})")
        if len(self.assignment) != self.dim:
            raise ValueError(
                f"Assignment covers {len(self.assignment)} basis vectors, expected {self.dim}"
            )
        count = len(self.classes)
        stray = sorted({m for m in self.assignment if not 0 <= m < count})
        if stray:
            raise ValueError(f"Assignment refers to unknown classes {stray}")
        empty = sorted(set(range(count)) - set(self.assignment))
        if empty:
            names = [self.classes[m].label for m in empty]
            raise ValueError(f"Eigenvalue classes without basis vectors: {names}")
        labels = [c.label for c in self.classes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Eigenvalue labels must be distinct: {labels}")
        values = [c.value for c in self.classes]
        if len(set(values)) != len(values):
            raise ValueError(f"Eigenvalues must be distinct: {values}")
        return self

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def computational(
        cls, dim: int, classes: Sequence[tuple[str, float, Sequence[int]]]
    ) -> Observable:
        """Observable diagonal in the computational basis with the given classes."""
        assignment = [-1] * dim
        for m, (_, _, members) in enumerate(classes):
            for n in members:
                if not 0 <= n < dim:
                    raise InvalidInputError(
                        f"Basis index {n} out of range for dimension {dim}",
                        code=ErrorCode.INDEX_OUT_OF_RANGE,
                    )
                if assignment[n] != -1:
                    raise InvalidInputError(
                        f"Basis index {n} placed in two classes",
                        code=ErrorCode.INCOMPLETE_PARTITION,
                    )
                assignment[n] = m
        if -1 in assignment:
            raise InvalidInputError(
                f"Basis indices {[n for n, m in enumerate(assignment) if m == -1]} "
                "belong to no class",
                code=ErrorCode.INCOMPLETE_PARTITION,
            )
        return cls(
            basis=np.eye(dim),
            classes=tuple(EigenClass(label=label, value=value) for label, value, _ in classes),
            assignment=tuple(assignment),
        )

    @classmethod
    def non_degenerate(
        cls,
        basis: npt.ArrayLike,
        labels: Sequence[str] | None = None,
    ) -> Observable:
        """Every basis vector in a class of its own; labels default to q0, q1, ..."""
        matrix = np.asarray(basis, dtype=np.complex128)
        dim = matrix.shape[0]
        names = list(labels) if labels is not None else [f"q{n}" for n in range(dim)]
        return cls(
            basis=matrix,
            classes=tuple(EigenClass(label=name, value=float(n)) for n, name in enumerate(names)),
            assignment=tuple(range(dim)),
        )

    @classmethod
    def trivial(cls, dim: int, label: str = PREPARED_LABEL) -> Observable:
        """Single class holding the whole space (M = 1)."""
        return cls(
            basis=np.eye(dim),
            classes=(EigenClass(label=label, value=0.0),),
            assignment=(0,) * dim,
        )

    @classmethod
    def from_state(cls, vector: npt.ArrayLike) -> Observable:
        """Non-degenerate preparation observable whose class 'prepared' is the state."""
        basis = complete_basis(vector)
        return cls.non_degenerate(basis, _preparation_labels(basis.shape[0]))

    @classmethod
    def preparation(cls, local_vectors: Sequence[npt.ArrayLike]) -> Observable:
        """
        Non-degenerate preparation observable for a product state.

        The basis is the Kronecker product of per-factor completions, so the
        product state is exactly basis column 0.
        """
        completions = [np.asarray(complete_basis(v)) for v in local_vectors]
        basis = reduce(np.kron, completions)
        return cls.non_degenerate(basis, _preparation_labels(basis.shape[0]))

    @classmethod
    def from_class_vectors(
        cls, classes: Sequence[tuple[str, float, Sequence[npt.ArrayLike]]]
    ) -> Observable:
        """Observable whose basis is the concatenation of each class's vectors."""
        columns: list[npt.NDArray[np.complex128]] = []
        assignment: list[int] = []
        for m, (_, _, vectors) in enumerate(classes):
            for vector in vectors:
                columns.append(np.asarray(vector, dtype=np.complex128))
                assignment.append(m)
        return cls(
            basis=np.column_stack(columns),
            classes=tuple(EigenClass(label=label, value=value) for label, value, _ in classes),
            assignment=tuple(assignment),
        )

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes)

    @property
    def is_non_degenerate(self) -> bool:
        return self.num_classes == self.dim

    def members(self, m: int) -> tuple[int, ...]:
        """Basis indices n with assignment(n) = m."""
        return tuple(n for n, k in enumerate(self.assignment) if k == m)

    def index_of(self, label: str) -> int:
        """
        Class index for a label.

        Raises:
            InvalidInputError: If no class carries the label.
        """
        for m, eigen in enumerate(self.classes):
            if eigen.label == label:
                return m
        raise InvalidInputError(
            f"Unknown eigenvalue label {label!r}", code=ErrorCode.UNKNOWN_LABEL
        )

    def projector(self, m: int) -> COperator:
        return projector(self, m)

    def class_weights(self, vector: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """||Π_m v||² for every class m."""
        coefficients = self.basis.conj().T @ np.asarray(vector, dtype=np.complex128)
        return np.bincount(
            np.asarray(self.assignment),
            weights=np.abs(coefficients) ** 2,
            minlength=self.num_classes,
        )

    def class_of(self, vector: npt.ArrayLike, tol: float = 1e-10) -> int | None:
        """Class the vector lies in, or None when it straddles several."""
        weights = self.class_weights(vector)
        total = float(weights.sum())
        if total == 0.0:
            return None
        m = int(np.argmax(weights))
        return m if weights[m] >= total * (1.0 - tol) else None


def _preparation_labels(dim: int) -> list[str]:
    return [PREPARED_LABEL] + [f"q{n}" for n in range(1, dim)]


def projector(obs: Observable, m: int) -> COperator:
    """
    Projector Π_m = Σ_{n: assignment(n)=m} |q_n><q_n|.

    Raises:
        InvalidInputError: If m is not a class index of obs.
    """
    if not 0 <= m < obs.num_classes:
        raise InvalidInputError(
            f"Eigenvalue index {m} out of range for {obs.num_classes} classes",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    columns = obs.basis[:, list(obs.members(m))]
    result = columns @ columns.conj().T
    result.setflags(write=False)
    return result


class MixtureComponent(BaseModel):
    """One weighted pure state |q^ν_0> of a mixture."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    weight: float = Field(..., gt=0, le=1)
    state: VectorArray


class InitialState(BaseModel):
    """Pure state or finite mixture of (not necessarily orthogonal) pure states."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    components: tuple[MixtureComponent, ...] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_components(self) -> InitialState:
        dims = {c.state.shape[0] for c in self.components}
        if len(dims) != 1:
            raise ValueError(f"Mixture components have different dimensions {sorted(dims)}")
        for k, component in enumerate(self.components):
            norm = float(np.linalg.norm(component.state))
            if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
                raise ValueError(f"Component {k} is not normalized (norm {norm:.15g})")
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"Mixture weights sum to {total:.15g}, expected 1")
        return self

    @classmethod
    def pure(cls, vector: npt.ArrayLike) -> InitialState:
        return cls(components=(MixtureComponent(weight=1.0, state=vector),))

    @classmethod
    def mixed(cls, components: Sequence[tuple[float, npt.ArrayLike]]) -> InitialState:
        return cls(
            components=tuple(
                MixtureComponent(weight=weight, state=state) for weight, state in components
            )
        )

    @property
    def dim(self) -> int:
        return int(self.components[0].state.shape[0])

    @property
    def is_pure(self) -> bool:
        return len(self.components) == 1

    @property
    def vector(self) -> CVector:
        """The state of a pure initial state."""
        if not self.is_pure:
            raise InvalidInputError(
                "Initial state is a mixture, not a pure state", code=ErrorCode.INVALID_STATE
            )
        return self.components[0].state

    def density_matrix(self) -> COperator:
        """ρ₀ = Σ_ν w_ν |q^ν_0><q^ν_0|."""
        rho = sum(
            (c.weight * np.outer(c.state, c.state.conj()) for c in self.components),
            start=np.zeros((self.dim, self.dim), dtype=np.complex128),
        )
        rho.setflags(write=False)
        return rho


class MeasurementChain(BaseModel):
    """
    Times t_0 < ... < t_L, interval unitaries U_ℓ = U(t_ℓ, t_{ℓ-1}) for ℓ = 1..L,
    observables Q^0..Q^L and the initial state.

    Construction only coerces types; use validate_chain for the invariants.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: tuple[float, ...]
    unitaries: tuple[OperatorArray, ...]
    observables: tuple[Observable, ...]
    initial: InitialState

    @property
    def dim(self) -> int:
        return self.initial.dim

    @property
    def steps(self) -> int:
        """Number of measurements after the preparation (L)."""
        return len(self.unitaries)

    @property
    def preparation(self) -> Observable:
        return self.observables[0]


class ValidationIssue(BaseModel):
    """One violated invariant."""

    model_config = ConfigDict(frozen=True)

    location: str
    message: str
    code: ErrorCode


class ValidationReport(BaseModel):
    """Every violated invariant of a chain; empty iff the chain is valid."""

    model_config = ConfigDict(frozen=True)

    issues: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{issue.location}: {issue.message}" for issue in self.issues)


def validate_chain(chain: MeasurementChain, tol: float = UNITARITY_TOLERANCE) -> ValidationReport:
    """
    Check every chain invariant and list the violations.

    Args:
        chain: Chain to check.
        tol: Unitarity tolerance on max |U†U − I|.

    Returns:
        Report with one issue per violation, in a fixed order.
    """
    issues: list[ValidationIssue] = []

    def add(location: str, message: str, code: ErrorCode) -> None:
        issues.append(ValidationIssue(location=location, message=message, code=code))

    dim = chain.dim
    times = chain.times

    if len(times) < 2:
        add("times", "a chain needs a preparation time and one later time", ErrorCode.INVALID_CHAIN)
    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            add(f"times[{i}]", f"non-increasing times at index {i}", ErrorCode.INVALID_CHAIN)
    if len(chain.unitaries) != len(times) - 1:
        add(
            "unitaries",
            f"expected {len(times) - 1} interval unitaries, got {len(chain.unitaries)}",
            ErrorCode.INVALID_CHAIN,
        )
    if len(chain.observables) != len(times):
        add(
            "observables",
            f"expected {len(times)} observables, got {len(chain.observables)}",
            ErrorCode.INVALID_CHAIN,
        )

    for step, unitary in enumerate(chain.unitaries, start=1):
        if unitary.shape[0] != dim:
            add(
                f"U[{step}]",
                f"dimension {unitary.shape[0]} does not match state dimension {dim}",
                ErrorCode.DIMENSION_MISMATCH,
            )
            continue
        deviation = unitarity_deviation(unitary)
        if deviation >= tol:
            add(
                f"U[{step}]",
                f"unitarity violation, max deviation {deviation:.3e}",
                ErrorCode.NON_UNITARY,
            )

    for step, obs in enumerate(chain.observables):
        if obs.dim != dim:
            add(
                f"Q[{step}]",
                f"dimension {obs.dim} does not match state dimension {dim}",
                ErrorCode.DIMENSION_MISMATCH,
            )

    if chain.observables and chain.preparation.dim == dim:
        prep = chain.preparation
        if chain.initial.is_pure and not prep.is_non_degenerate:
            add(
                "Q[0]",
                "preparation observable must be non-degenerate for a pure initial state",
                ErrorCode.INVALID_CHAIN,
            )
        for k, component in enumerate(chain.initial.components):
            if prep.class_of(component.state) is None:
                add(
                    f"initial[{k}]",
                    "initial state does not lie in a single preparation class",
                    ErrorCode.INVALID_STATE,
                )

    return ValidationReport(issues=tuple(issues))


def ensure_valid(chain: MeasurementChain) -> None:
    """
    Raise if the chain violates any invariant.

    Raises:
        InvalidInputError: With code invalid_chain and the report text.
    """
    report = validate_chain(chain)
    if not report.ok:
        raise InvalidInputError(
            f"Invalid measurement chain: {report}", code=ErrorCode.INVALID_CHAIN
        )
