"""Closed-form value next to the engine value for one experiment."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict

from qchain.models.distribution import LabelTuple


class GedankenResult(BaseModel):
    """Closed-form and engine probabilities keyed by outcome-label tuples."""

    model_config = ConfigDict(frozen=True)

    name: str
    axes: tuple[str, ...]
    closed_form: dict[LabelTuple, float]
    engine: dict[LabelTuple, float]

    @property
    def differences(self) -> dict[LabelTuple, float]:
        """|closed form − engine| per label tuple; missing entries count as 0."""
        keys = sorted(set(self.closed_form) | set(self.engine))
        return {
            key: abs(self.closed_form.get(key, 0.0) - self.engine.get(key, 0.0)) for key in keys
        }

    @property
    def max_difference(self) -> float:
        return max(self.differences.values(), default=0.0)

    def closed(self, *labels: str) -> float:
        return self.closed_form.get(labels, 0.0)

    def computed(self, *labels: str) -> float:
        return self.engine.get(labels, 0.0)
