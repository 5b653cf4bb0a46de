"""Composite Hilbert space made of labelled tensor factors."""

from __future__ import annotations

import math
from collections.abc import Sequence
from enum import Enum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qchain.config import resolve_dim_cap
from qchain.errors import CapacityError, ErrorCode, InvalidInputError


class FactorRole(str, Enum):
    """What a tensor factor stands for."""

    SYSTEM = "system"
    PROBE = "probe"
    MEMORY = "memory"


class Factor(BaseModel):
    """One tensor factor: label, dimension and role."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1)
    dim: int = Field(..., ge=2)
    role: FactorRole = FactorRole.SYSTEM


class CompositeSpace(BaseModel):
    """Ordered tensor factors, left-most factor most significant."""

    model_config = ConfigDict(frozen=True)

    factors: tuple[Factor, ...] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_factors(self) -> CompositeSpace:
        labels = [factor.label for factor in self.factors]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise InvalidInputError(
                f"Duplicate factor labels: {duplicates}", code=ErrorCode.DUPLICATE_LABEL
            )
        cap = resolve_dim_cap()
        if self.dim > cap:
            raise CapacityError(f"Composite dimension {self.dim} exceeds the cap of {cap}")
        return self

    @classmethod
    def of(cls, *factors: tuple[str, int, FactorRole | str]) -> CompositeSpace:
        """Shorthand: CompositeSpace.of(("d", 3, "probe"), ("s", 2, "system"))."""
        return cls(
            factors=tuple(
                Factor(label=label, dim=dim, role=FactorRole(role)) for label, dim, role in factors
            )
        )

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(factor.dim for factor in self.factors)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(factor.label for factor in self.factors)

    def index_of(self, label: str) -> int:
        """
        Position of a factor.

        Raises:
            InvalidInputError: If no factor carries the label.
        """
        for index, factor in enumerate(self.factors):
            if factor.label == label:
                return index
        raise InvalidInputError(f"Unknown factor label {label!r}", code=ErrorCode.UNKNOWN_LABEL)

    def indices_of(self, labels: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.index_of(label) for label in labels)

    def factor(self, label: str) -> Factor:
        return self.factors[self.index_of(label)]

    def local_dim(self, labels: Sequence[str]) -> int:
        """Dimension of the sub-space spanned by the named factors."""
        return math.prod(self.factor(label).dim for label in labels)

    def labels_with_role(self, role: FactorRole) -> tuple[str, ...]:
        return tuple(factor.label for factor in self.factors if factor.role is role)

    def local_indices(self, labels: Sequence[str]) -> npt.NDArray[np.intp]:
        """
        Local flat index of every composite basis state on the named factors.

        Entry j is the index of basis state j restricted to ``labels``, using the
        big-endian convention over the factors in the order given.
        """
        positions = self.indices_of(labels)
        digits = np.unravel_index(np.arange(self.dim), self.dims)
        local_dims = tuple(self.dims[p] for p in positions)
        return np.ravel_multi_index(tuple(digits[p] for p in positions), local_dims)
