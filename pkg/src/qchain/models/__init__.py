"""Data models."""

from qchain.models.chain import (
    EigenClass,
    InitialState,
    MeasurementChain,
    MixtureComponent,
    Observable,
    ValidationIssue,
    ValidationReport,
    ensure_valid,
    projector,
    validate_chain,
)
from qchain.models.distribution import Distribution, LabelTuple, OutcomeSequence, VirtualPath
from qchain.models.space import CompositeSpace, Factor, FactorRole

__all__ = [
    "CompositeSpace",
    "Distribution",
    "EigenClass",
    "Factor",
    "FactorRole",
    "InitialState",
    "LabelTuple",
    "MeasurementChain",
    "MixtureComponent",
    "Observable",
    "OutcomeSequence",
    "ValidationIssue",
    "ValidationReport",
    "VirtualPath",
    "ensure_valid",
    "projector",
    "validate_chain",
]
