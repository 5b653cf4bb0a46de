"""Partial evolution operators, conditional density operators and trace probabilities.

This is the operator form of the path sum: the intermediate projectors are
inserted between interval unitaries, and probabilities come from traces. It
shares no code with the path-sum engine so the two can check each other.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from scipy import linalg

from qchain.constants import NORMALIZATION_TOLERANCE, POSITIVITY_FLOOR
from qchain.errors import ErrorCode, InvalidInputError
from qchain.hilbert import COperator
from qchain.logging import get_logger
from qchain.models.chain import MeasurementChain, ensure_valid, projector
from qchain.models.distribution import Distribution, OutcomeSequence

logger = get_logger("engines.evolution")

DENSITY_TOLERANCE = 1e-10


def _check_intermediates(chain: MeasurementChain, intermediates: Sequence[int]) -> None:
    if len(intermediates) != chain.steps - 1:
        raise InvalidInputError(
            f"Expected {chain.steps - 1} intermediate classes, got {len(intermediates)}",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    for step, m in enumerate(intermediates, start=1):
        bound = chain.observables[step].num_classes
        if not 0 <= m < bound:
            raise InvalidInputError(
                f"Class {m} at time {step} out of range (< {bound})",
                code=ErrorCode.INDEX_OUT_OF_RANGE,
            )


def _readonly(matrix: npt.NDArray[np.complex128]) -> COperator:
    matrix.setflags(write=False)
    return matrix


def partial_evolution(chain: MeasurementChain, intermediates: Sequence[int]) -> COperator:
    """
    U(t_L, t_{L-1}) Π^{L-1}_{m_{L-1}} U(t_{L-1}, t_{L-2}) ... Π^1_{m_1} U(t_1, t_0).

    Args:
        chain: Valid measurement chain.
        intermediates: Classes (m_1, ..., m_{L-1}).

    Raises:
        InvalidInputError: If the chain is invalid or a class is out of range.
    """
    ensure_valid(chain)
    _check_intermediates(chain, intermediates)
    return _readonly(_partial_evolution(chain, intermediates))


def _partial_evolution(
    chain: MeasurementChain, intermediates: Sequence[int]
) -> npt.NDArray[np.complex128]:
    result = np.array(chain.unitaries[0], dtype=np.complex128)
    for step in range(1, chain.steps):
        pi = projector(chain.observables[step], intermediates[step - 1])
        result = chain.unitaries[step] @ pi @ result
    return result


def heisenberg_projector(chain: MeasurementChain, step: int, m: int) -> COperator:
    """Π^ℓ_m(t_ℓ) = U(t_ℓ, t_0)† Π^ℓ_m U(t_ℓ, t_0)."""
    ensure_valid(chain)
    if not 0 <= step <= chain.steps:
        raise InvalidInputError(
            f"Time index {step} out of range", code=ErrorCode.INDEX_OUT_OF_RANGE
        )
    evolution = np.eye(chain.dim, dtype=np.complex128)
    for unitary in chain.unitaries[:step]:
        evolution = unitary @ evolution
    pi = projector(chain.observables[step], m)
    return _readonly(evolution.conj().T @ pi @ evolution)


def projector_product(chain: MeasurementChain, intermediates: Sequence[int]) -> COperator:
    """
    Π^1(t_1) ... Π^{L-1}(t_{L-1}) Π^{L-1}(t_{L-1}) ... Π^1(t_1) from Heisenberg projectors.

    Equals partial_evolution† · partial_evolution; differs from the identity
    whenever an intermediate projector is non-trivial.
    """
    ensure_valid(chain)
    _check_intermediates(chain, intermediates)
    right = np.eye(chain.dim, dtype=np.complex128)
    for step, m in enumerate(intermediates, start=1):
        right = heisenberg_projector(chain, step, m) @ right
    return _readonly(right.conj().T @ right)


def _validate_density(rho: npt.NDArray[np.complex128], dim: int) -> None:
    if rho.shape != (dim, dim):
        raise InvalidInputError(
            f"Density operator of shape {rho.shape} does not match dimension {dim}",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    hermiticity = float(np.max(np.abs(rho - rho.conj().T)))
    if hermiticity > DENSITY_TOLERANCE:
        raise InvalidInputError(
            f"Density operator is not Hermitian (max deviation {hermiticity:.3e})",
            code=ErrorCode.INVALID_STATE,
        )
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > DENSITY_TOLERANCE:
        raise InvalidInputError(
            f"Density operator has trace {trace.real:.15g}, expected 1",
            code=ErrorCode.INVALID_STATE,
        )
    floor = float(linalg.eigvalsh(rho).min())
    if floor < POSITIVITY_FLOOR:
        raise InvalidInputError(
            f"Density operator is not positive semidefinite (eigenvalue {floor:.3e})",
            code=ErrorCode.INVALID_STATE,
        )


def conditional_state(
    chain: MeasurementChain,
    intermediates: Sequence[int],
    rho0: npt.ArrayLike | None = None,
) -> COperator:
    """
    U_partial ρ₀ U_partial†.

    Args:
        chain: Valid measurement chain.
        intermediates: Classes (m_1, ..., m_{L-1}).
        rho0: Density operator; defaults to the chain's initial state.

    Returns:
        Hermitian positive semidefinite operator with trace <= 1.

    Raises:
        InvalidInputError: If rho0 is not Hermitian, positive or unit-trace.
    """
    rho = (
        np.asarray(chain.initial.density_matrix())
        if rho0 is None
        else np.asarray(rho0, dtype=np.complex128)
    )
    _validate_density(rho, chain.dim)
    evolution = partial_evolution(chain, intermediates)
    return _readonly(evolution @ rho @ evolution.conj().T)


def _prepared_density(chain: MeasurementChain, m0: int) -> npt.NDArray[np.complex128]:
    pi = projector(chain.preparation, m0)
    return pi @ chain.initial.density_matrix() @ pi


def trace_probability(chain: MeasurementChain, outcomes: Sequence[int]) -> float:
    """
    tr[Π^L_{m_L} U_partial Π^0 ρ₀ Π^0 U_partial†] for (m_0, ..., m_L).

    Raises:
        InvalidInputError: If the chain is invalid or an entry is out of range.
    """
    ensure_valid(chain)
    if len(outcomes) != chain.steps + 1:
        raise InvalidInputError(
            f"Expected {chain.steps + 1} entries, got {len(outcomes)}",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    m0, *intermediates, m_last = outcomes
    if not 0 <= m0 < chain.preparation.num_classes:
        raise InvalidInputError(
            f"Preparation class {m0} out of range", code=ErrorCode.INDEX_OUT_OF_RANGE
        )
    _check_intermediates(chain, intermediates)
    evolution = _partial_evolution(chain, intermediates)
    rho = evolution @ _prepared_density(chain, m0) @ evolution.conj().T
    final = projector(chain.observables[-1], m_last)
    return float(np.real(np.trace(final @ rho)))


def trace_distribution(chain: MeasurementChain) -> Distribution:
    """
    Every outcome probability by the trace rule.

    Enumerates the same sequences as the path-sum engine: every preparation
    class carrying weight, every intermediate and final class.
    """
    ensure_valid(chain)
    prep = chain.preparation
    weights = sum(c.weight * prep.class_weights(c.state) for c in chain.initial.components)
    prepared = [m0 for m0, w in enumerate(weights) if w > NORMALIZATION_TOLERANCE]
    finals = [projector(chain.observables[-1], m) for m in range(chain.observables[-1].num_classes)]
    inner = [range(chain.observables[step].num_classes) for step in range(1, chain.steps)]
    logger.debug("Trace rule over %d preparation class(es), dim %d", len(prepared), chain.dim)

    probabilities: dict[OutcomeSequence, float] = {}
    for m0 in prepared:
        rho = _prepared_density(chain, m0)
        for intermediates in itertools.product(*inner):
            evolution = _partial_evolution(chain, intermediates)
            conditioned = evolution @ rho @ evolution.conj().T
            for m_last, final in enumerate(finals):
                probabilities[(m0, *intermediates, m_last)] = float(
                    np.real(np.trace(final @ conditioned))
                )

    return Distribution(
        axes=tuple(obs.labels for obs in chain.observables),
        names=tuple(f"t{step}" for step in range(chain.steps + 1)),
        probabilities=probabilities,
    )
