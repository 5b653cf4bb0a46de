"""Path-sum probability calculus over a measurement chain.

A virtual path picks one basis vector per time and carries the product of
interval matrix elements. Real paths sum virtual amplitudes over the
degenerate basis vectors of every intermediate class. Probabilities sum
|real amplitude|² over the degenerate basis vectors of the final class.

The sums are evaluated with transfer matrices T_ℓ = B_ℓ† U_ℓ B_{ℓ-1}
(B_ℓ the eigenbasis of Q^ℓ): restricting the running amplitude vector to
class m_ℓ and applying T_{ℓ+1} is exactly the sum over n_ℓ in that class.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from qchain.errors import ErrorCode, InvalidInputError
from qchain.logging import get_logger
from qchain.models.chain import MeasurementChain, Observable, ensure_valid
from qchain.models.distribution import Distribution, OutcomeSequence, VirtualPath

logger = get_logger("engines.feynman")

Amplitudes = npt.NDArray[np.complex128]


def transfer_matrices(chain: MeasurementChain) -> list[Amplitudes]:
    """T_ℓ[n', n] = <q^ℓ_{n'}| U_ℓ |q^{ℓ-1}_n> for ℓ = 1..L (list index ℓ-1)."""
    obs = chain.observables
    return [
        obs[step].basis.conj().T @ unitary @ obs[step - 1].basis
        for step, unitary in enumerate(chain.unitaries, start=1)
    ]


def _class_mask(obs: Observable, m: int) -> npt.NDArray[np.bool_]:
    return np.asarray(obs.assignment) == m


def _start_amplitudes(chain: MeasurementChain, component: int) -> tuple[int, Amplitudes]:
    """Preparation class m_0 of a component and its coefficients <q^0_n|ψ> inside it."""
    if not 0 <= component < len(chain.initial.components):
        raise InvalidInputError(
            f"Mixture component {component} out of range",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    prep = chain.preparation
    state = chain.initial.components[component].state
    m0 = prep.class_of(state)
    if m0 is None:
        raise InvalidInputError(
            "Initial state does not lie in a single preparation class",
            code=ErrorCode.INVALID_STATE,
        )
    coefficients = prep.basis.conj().T @ state
    return m0, np.where(_class_mask(prep, m0), coefficients, 0.0)


def _check_outcomes(chain: MeasurementChain, outcomes: Sequence[int], final_is_basis: bool) -> None:
    if len(outcomes) != chain.steps + 1:
        raise InvalidInputError(
            f"Expected {chain.steps + 1} entries, got {len(outcomes)}",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    for step, value in enumerate(outcomes):
        obs = chain.observables[step]
        bound = obs.dim if (final_is_basis and step == chain.steps) else obs.num_classes
        if not 0 <= value < bound:
            raise InvalidInputError(
                f"Entry {value} at time {step} out of range (< {bound})",
                code=ErrorCode.INDEX_OUT_OF_RANGE,
            )


def virtual_amplitude(chain: MeasurementChain, path: VirtualPath) -> complex:
    """
    Amplitude ∏_ℓ <q^ℓ_{n_ℓ}| U_ℓ |q^{ℓ-1}_{n_{ℓ-1}}> of one virtual path.

    Args:
        chain: Valid measurement chain.
        path: Basis indices (n_0, ..., n_L).

    Raises:
        InvalidInputError: If the chain is invalid or the path malformed.
    """
    ensure_valid(chain)
    if len(path) != chain.steps + 1 or any(not 0 <= n < chain.dim for n in path):
        raise InvalidInputError(
            f"Path {tuple(path)} is not a tuple of {chain.steps + 1} basis indices below "
            f"{chain.dim}",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    obs = chain.observables
    amplitude = complex(1.0)
    for step, unitary in enumerate(chain.unitaries, start=1):
        ket = obs[step - 1].basis[:, path[step - 1]]
        bra = obs[step].basis[:, path[step]].conj()
        amplitude *= complex(bra @ unitary @ ket)
    return amplitude


def _propagate(
    transfers: Sequence[Amplitudes],
    chain: MeasurementChain,
    start: Amplitudes,
    intermediates: Sequence[int],
) -> Amplitudes:
    """Amplitudes over final basis vectors for fixed intermediate classes."""
    vector = start
    for step, transfer in enumerate(transfers, start=1):
        vector = transfer @ vector
        if step < chain.steps:
            mask = _class_mask(chain.observables[step], intermediates[step - 1])
            vector = np.where(mask, vector, 0)
    return vector


def real_amplitude(
    chain: MeasurementChain, outcomes: Sequence[int], *, component: int = 0
) -> complex:
    """
    Real-path amplitude for (m_0, m_1, ..., m_{L-1}, n_L).

    Sums virtual amplitudes over every intermediate n_ℓ in class m_ℓ. The
    initial index is fixed by the preparation; the amplitude includes the
    unit-modulus overlap <q^0_{n_0}|ψ>, and is 0 when m_0 is not the class
    holding the initial state.

    Args:
        chain: Valid measurement chain.
        outcomes: Classes m_0..m_{L-1} followed by the final basis index n_L.
        component: Mixture component supplying the initial state.

    Raises:
        InvalidInputError: If the chain is invalid or an entry is out of range.
    """
    ensure_valid(chain)
    _check_outcomes(chain, outcomes, final_is_basis=True)
    m0, start = _start_amplitudes(chain, component)
    if outcomes[0] != m0:
        return 0j
    vector = _propagate(transfer_matrices(chain), chain, start, outcomes[1:-1])
    return complex(vector[outcomes[-1]])


def _outcome_axes(chain: MeasurementChain) -> tuple[tuple[str, ...], ...]:
    return tuple(obs.labels for obs in chain.observables)


def _time_names(chain: MeasurementChain) -> tuple[str, ...]:
    return tuple(f"t{step}" for step in range(chain.steps + 1))


def chain_distribution(
    chain: MeasurementChain, *, prune_below: float | None = None
) -> Distribution:
    """
    Probability of every outcome sequence (m_0, ..., m_L).

    Each entry is Σ_{n_L in class m_L} |real amplitude|². A mixed initial
    state gives the weighted sum of its component distributions.

    Args:
        chain: Valid measurement chain.
        prune_below: Skip branches whose amplitude norm falls below this value.

    Returns:
        Distribution over every sequence whose m_0 holds a component.

    Raises:
        InvalidInputError: If the chain is invalid.
    """
    ensure_valid(chain)
    transfers = transfer_matrices(chain)
    observables = chain.observables
    steps = chain.steps
    final = observables[-1]
    final_assignment = np.asarray(final.assignment)

    starts = [_start_amplitudes(chain, k) for k in range(len(chain.initial.components))]
    inner_ranges = [range(observables[step].num_classes) for step in range(1, steps + 1)]

    probabilities: dict[OutcomeSequence, float] = {}
    for m0 in sorted({m0 for m0, _ in starts}):
        for rest in itertools.product(*inner_ranges):
            probabilities[(m0, *rest)] = 0.0
    logger.debug(
        "Path sum over %d outcome sequences, %d component(s), dim %d",
        len(probabilities),
        len(starts),
        chain.dim,
    )

    def descend(
        step: int, vector: Amplitudes, prefix: tuple[int, ...], weight: float, m0: int
    ) -> None:
        vector = transfers[step - 1] @ vector
        if step == steps:
            class_weights = np.bincount(
                final_assignment, weights=np.abs(vector) ** 2, minlength=final.num_classes
            )
            for m_last, p in enumerate(class_weights):
                probabilities[(m0, *prefix, m_last)] += weight * float(p)
            return
        obs = observables[step]
        for m in range(obs.num_classes):
            branch = np.where(_class_mask(obs, m), vector, 0)
            if prune_below is not None and float(np.linalg.norm(branch)) < prune_below:
                continue
            descend(step + 1, branch, (*prefix, m), weight, m0)

    for component, (m0, start) in zip(chain.initial.components, starts, strict=True):
        descend(1, start, (), component.weight, m0)

    return Distribution(
        axes=_outcome_axes(chain), names=_time_names(chain), probabilities=probabilities
    )


def markov_probability(chain: MeasurementChain, outcomes: Sequence[int]) -> float:
    """
    Product of single-step transition probabilities.

    Only defined when every observable is non-degenerate; equals the
    chain_distribution entry in that case and nowhere else in general.

    Raises:
        InvalidInputError: If some observable is degenerate.
    """
    ensure_valid(chain)
    if not all(obs.is_non_degenerate for obs in chain.observables):
        raise InvalidInputError(
            "Markov product needs non-degenerate observables at every time",
            code=ErrorCode.INVALID_CHAIN,
        )
    _check_outcomes(chain, outcomes, final_is_basis=False)
    path = [chain.observables[step].members(m)[0] for step, m in enumerate(outcomes)]
    transfers = transfer_matrices(chain)

    prep_basis = chain.preparation.basis[:, path[0]]
    start = sum(
        c.weight * abs(complex(prep_basis.conj() @ c.state)) ** 2
        for c in chain.initial.components
    )
    product = float(start)
    for step, transfer in enumerate(transfers, start=1):
        product *= abs(complex(transfer[path[step], path[step - 1]])) ** 2
    return product


def coherent_final_probability(chain: MeasurementChain, outcomes: Sequence[int]) -> float:
    """
    |Σ_{n_L in class m_L} amplitude|², the coherent sum over the final class.

    This is not a probability rule; it exists to pin where it departs from
    summing |amplitude|² over the final degeneracy.
    """
    ensure_valid(chain)
    _check_outcomes(chain, outcomes, final_is_basis=False)
    final = chain.observables[-1]
    total = sum(
        real_amplitude(chain, (*outcomes[:-1], n)) for n in final.members(outcomes[-1])
    )
    return abs(total) ** 2
