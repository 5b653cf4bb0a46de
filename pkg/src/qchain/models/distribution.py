"""Outcome sequences and their probability distributions."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from qchain.errors import ErrorCode, InvalidInputError

OutcomeSequence = tuple[int, ...]
VirtualPath = tuple[int, ...]
LabelTuple = tuple[str, ...]


class Distribution(BaseModel):
    """
    Probabilities keyed by eigenvalue-class tuples (m_0, ..., m_L).

    ``axes[ℓ]`` lists the class labels at time ℓ; ``names[ℓ]`` names the time.
    Values are raw sums; use ``clamped`` before reporting.
    """

    model_config = ConfigDict(frozen=True)

    axes: tuple[tuple[str, ...], ...]
    names: tuple[str, ...] = ()
    probabilities: dict[OutcomeSequence, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_keys(self) -> Distribution:
        if self.names and len(self.names) != len(self.axes):
            raise ValueError(f"{len(self.names)} axis names for {len(self.axes)} axes")
        for key in self.probabilities:
            if len(key) != len(self.axes):
                raise ValueError(f"Outcome {key} does not have {len(self.axes)} entries")
            for axis, m in enumerate(key):
                if not 0 <= m < len(self.axes[axis]):
                    raise ValueError(f"Outcome {key} is out of range on axis {axis}")
        return self

    @property
    def axis_names(self) -> tuple[str, ...]:
        return self.names or tuple(f"t{i}" for i in range(len(self.axes)))

    def labels_of(self, key: OutcomeSequence) -> LabelTuple:
        return tuple(self.axes[axis][m] for axis, m in enumerate(key))

    def total(self) -> float:
        return float(sum(self.probabilities.values()))

    def by_labels(self) -> dict[LabelTuple, float]:
        return {self.labels_of(key): p for key, p in self.probabilities.items()}

    def probability_of(self, labels: Sequence[str]) -> float:
        """Probability of a label tuple; 0 for unlisted tuples."""
        return self.by_labels().get(tuple(labels), 0.0)

    def sorted_items(self) -> list[tuple[LabelTuple, float]]:
        """Entries sorted by outcome-label tuple."""
        return sorted(self.by_labels().items())

    def clamped(self) -> Distribution:
        """Copy with rounding-level negatives replaced by 0."""
        return self.model_copy(
            update={"probabilities": {k: max(p, 0.0) for k, p in self.probabilities.items()}}
        )

    def marginal(self, axes: Sequence[int]) -> Distribution:
        """
        Sum out every axis not listed.

        Raises:
            InvalidInputError: If an axis index is out of range.
        """
        keep = tuple(axes)
        for axis in keep:
            if not 0 <= axis < len(self.axes):
                raise InvalidInputError(
                    f"Axis {axis} out of range for {len(self.axes)} axes",
                    code=ErrorCode.INDEX_OUT_OF_RANGE,
                )
        sums: defaultdict[OutcomeSequence, float] = defaultdict(float)
        for key, p in self.probabilities.items():
            sums[tuple(key[a] for a in keep)] += p
        names = self.axis_names
        return Distribution(
            axes=tuple(self.axes[a] for a in keep),
            names=tuple(names[a] for a in keep),
            probabilities=dict(sums),
        )

    def max_abs_difference(self, other: Distribution) -> float:
        """Largest |p − q| over the union of label tuples; missing entries count as 0."""
        mine = self.by_labels()
        theirs = other.by_labels()
        keys = set(mine) | set(theirs)
        if not keys:
            return 0.0
        return max(abs(mine.get(k, 0.0) - theirs.get(k, 0.0)) for k in keys)
