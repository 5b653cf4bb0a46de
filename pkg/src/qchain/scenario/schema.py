"""Scenario document models.

The models only check structure; label, dimension, unitarity and ordering
checks happen in the parser so that each failure keeps its own error code.
"""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from qchain.config import EngineName

# A complex number: a plain real or an [re, im] pair
ComplexEntry = float | tuple[float, float]
VectorEntries = list[ComplexEntry]
MatrixRows = list[list[ComplexEntry]]

BuiltinMatrixName = Literal["identity", "hadamard", "rotation", "pauli_x", "haar"]
QueryKind = Literal["joint_distribution", "return_probability", "histories_check"]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NamedMatrix(_Document):
    """Built-in unitary: identity(dim), hadamard, rotation(theta), pauli_x or haar(dim, seed)."""

    builtin: BuiltinMatrixName
    dim: int | None = Field(default=None, ge=1)
    theta: float | None = None
    seed: int | None = None

    @model_validator(mode="after")
    def validate_arguments(self) -> NamedMatrix:
        if self.builtin == "rotation" and self.theta is None:
            raise ValueError("rotation needs theta")
        if self.builtin == "haar" and (self.dim is None or self.seed is None):
            raise ValueError("haar needs dim and seed")
        if self.builtin == "identity" and self.dim is None:
            raise ValueError("identity needs dim")
        return self


MatrixSpec = MatrixRows | NamedMatrix


class FactorDoc(_Document):
    label: str = Field(..., min_length=1)
    dim: int = Field(..., ge=2)
    role: Literal["system", "probe", "memory"] = "system"


class LocalState(_Document):
    """State of one factor, as a basis index or an explicit vector."""

    factor: str
    index: int | None = None
    vector: VectorEntries | None = None

    @model_validator(mode="after")
    def validate_choice(self) -> LocalState:
        if (self.index is None) == (self.vector is None):
            raise ValueError("give exactly one of index or vector")
        return self


class ProductInitial(_Document):
    """Product state; factors not listed start in state 0."""

    kind: Literal["product"] = "product"
    states: list[LocalState] = Field(default_factory=list)


class MixtureComponentDoc(_Document):
    weight: float = Field(..., gt=0, le=1)
    states: list[LocalState] = Field(default_factory=list)


class MixtureInitial(_Document):
    kind: Literal["mixture"] = "mixture"
    components: list[MixtureComponentDoc] = Field(..., min_length=1)


InitialDoc = Annotated[ProductInitial | MixtureInitial, Field(discriminator="kind")]


class ClassDoc(_Document):
    """Eigenvalue class: basis column indices or explicit vectors."""

    label: str = Field(..., min_length=1)
    value: float | None = None
    states: list[int] | None = None
    vectors: list[VectorEntries] | None = None

    @model_validator(mode="after")
    def validate_choice(self) -> ClassDoc:
        if (self.states is None) == (self.vectors is None):
            raise ValueError("give exactly one of states or vectors")
        return self


class ObservableDoc(_Document):
    """Classes over the columns of ``basis`` (computational when omitted), or over vectors."""

    basis: MatrixSpec | None = None
    classes: list[ClassDoc] = Field(..., min_length=1)


class _EventDoc(_Document):
    time: float
    seq: int | None = None


class UnitaryEventDoc(_EventDoc):
    kind: Literal["unitary"]
    factors: list[str] = Field(..., min_length=1)
    matrix: MatrixSpec


class CoupleEventDoc(_EventDoc):
    kind: Literal["couple"]
    probe: str
    targets: list[str] = Field(..., min_length=1)
    partition: ObservableDoc


class ReverseEventDoc(_EventDoc):
    """Undo the most recent coupling of the probe."""

    kind: Literal["reverse"]
    probe: str


class RegisterEventDoc(_EventDoc):
    kind: Literal["register"]
    memory: str
    probe: str


class ObserveEventDoc(_EventDoc):
    kind: Literal["observe"]
    factors: list[str] = Field(..., min_length=1)
    observable: ObservableDoc
    name: str | None = None


EventDoc = Annotated[
    UnitaryEventDoc | CoupleEventDoc | ReverseEventDoc | RegisterEventDoc | ObserveEventDoc,
    Field(discriminator="kind"),
]


class QueryDoc(_Document):
    """What to report; ``label`` picks the final class of a return_probability query."""

    kind: QueryKind = "joint_distribution"
    label: str | None = None


class OptionsDoc(_Document):
    tolerance: float | None = Field(default=None, gt=0, lt=1)
    engine: EngineName | None = None
    completion: Literal["modular", "swap"] = "modular"


class FamilyStepDoc(_Document):
    time: float
    observable: ObservableDoc


class ProjectorFamilyDoc(_Document):
    """
    Projector sets at chosen times, on the scenario's initial state and dynamics.

    The interval unitaries are the products of the scenario's operator events
    between consecutive step times. ``augment`` lists 1-based steps that get
    a probe (and a memory with ``register``); only single-factor scenarios
    can be augmented.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: str = Field(..., min_length=1)
    factors: list[str] | None = None
    steps: list[FamilyStepDoc] = Field(..., min_length=1)
    augment: list[int] = Field(default_factory=list)
    register_observers: bool = Field(default=True, alias="register")


class ScenarioDocument(_Document):
    """A complete scenario: factors, initial state, events, query and options."""

    format_version: Literal[1] = 1
    name: str = Field(..., min_length=1)
    description: str = ""
    factors: list[FactorDoc] = Field(..., min_length=1)
    initial: InitialDoc = Field(default_factory=ProductInitial)
    events: list[EventDoc] = Field(default_factory=list)
    query: QueryDoc = Field(default_factory=QueryDoc)
    options: OptionsDoc = Field(default_factory=OptionsDoc)
    projector_families: list[ProjectorFamilyDoc] = Field(default_factory=list)
