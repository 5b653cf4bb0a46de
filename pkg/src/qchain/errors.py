"""Error codes, exit statuses and the exception hierarchy."""

from __future__ import annotations

from enum import Enum
from typing import Any

EXIT_SUCCESS = 0
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_NUMERICAL = 4


class ErrorCode(str, Enum):
    """Machine-readable error codes."""

    SYNTAX_ERROR = "syntax_error"
    SCHEMA_ERROR = "schema_error"
    UNKNOWN_LABEL = "unknown_label"
    DUPLICATE_LABEL = "duplicate_label"
    NON_UNITARY = "non_unitary"
    INCOMPLETE_PARTITION = "incomplete_partition"
    TIME_COLLISION = "time_collision"
    DIMENSION_MISMATCH = "dimension_mismatch"
    INVALID_STATE = "invalid_state"
    CAPACITY_EXCEEDED = "capacity_exceeded"
    PROBE_TOO_SMALL = "probe_too_small"
    INDEX_OUT_OF_RANGE = "index_out_of_range"
    UNORDERED_EVENTS = "unordered_events"
    INVALID_CHAIN = "invalid_chain"
    MISSING_PROJECTOR_FAMILIES = "missing_projector_families"
    UNKNOWN_BUILTIN = "unknown_builtin"
    NO_OBSERVATION = "no_observation"
    INVALID_PARAMETERS = "invalid_parameters"
    UNREADABLE_INPUT = "unreadable_input"
    NUMERICAL_INVARIANT = "numerical_invariant"


class QchainError(Exception):
    """Base class for all qchain errors."""

    default_code: ErrorCode = ErrorCode.SCHEMA_ERROR
    exit_status: int = EXIT_VALIDATION

    def __init__(
        self,
        message: str,
        *,
        code: ErrorCode | None = None,
        path: str | None = None,
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.code = code or self.default_code
        self.path = path
        self.line = line
        self.column = column

    def __str__(self) -> str:
        where = []
        if self.path:
            where.append(f"at {self.path}")
        if self.line is not None:
            where.append(f"line {self.line} column {self.column}")
        suffix = f" ({', '.join(where)})" if where else ""
        return f"{self.message}{suffix}"

    def to_dict(self) -> dict[str, Any]:
        """Structured form for machine consumers."""
        data: dict[str, Any] = {"code": self.code.value, "message": self.message}
        if self.path is not None:
            data["path"] = self.path
        if self.line is not None:
            data["line"] = self.line
            data["column"] = self.column
        return data


class InvalidInputError(QchainError, ValueError):
    """Input violates a documented precondition or invariant."""


class ScenarioParseError(InvalidInputError):
    """Scenario document could not be parsed or validated."""


class CapacityError(QchainError):
    """Composite dimension exceeds the configured cap."""

    default_code = ErrorCode.CAPACITY_EXCEEDED
    exit_status = EXIT_CAPACITY


class NumericalInvariantError(QchainError):
    """A computed result violates a numerical invariant beyond tolerance."""

    default_code = ErrorCode.NUMERICAL_INVARIANT
    exit_status = EXIT_NUMERICAL
