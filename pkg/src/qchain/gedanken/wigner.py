"""Wigner's friend: F registers an outcome, then consults the same memory again later.

Composite: F's memory (3), F's probe (3), system (2). Between the two
perceptions the probe and system may interact arbitrarily; the memory does
not take part, so both readouts agree.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt
from scipy import linalg

from qchain.apparatus import (
    CoupleEvent,
    CouplingSpec,
    Event,
    ObserveEvent,
    RegisterEvent,
    UnitaryEvent,
    assemble_chain,
    product_state,
)
from qchain.engines.feynman import chain_distribution
from qchain.errors import ErrorCode, InvalidInputError
from qchain.gedanken.result import GedankenResult
from qchain.hilbert import COperator, as_operator, as_vector, basis_vector, identity
from qchain.models.chain import InitialState, MeasurementChain, Observable
from qchain.models.space import CompositeSpace

MEMORY, PROBE, SYSTEM = "mu", "d", "s"


def wigner_space() -> CompositeSpace:
    return CompositeSpace.of((MEMORY, 3, "memory"), (PROBE, 3, "probe"), (SYSTEM, 2, "system"))


def memory_observable() -> Observable:
    return Observable.computational(3, [("blank", 0, [0]), ("yes", 1, [1]), ("no", 2, [2])])


def probe_system_unitary(u_ds: npt.ArrayLike | None) -> COperator:
    """
    Interaction on (probe, system) after the first perception.

    A 4x4 matrix acts on the outcome sector d_1, d_2 and is extended by the
    identity on d_0; a 6x6 matrix is used as given.

    Raises:
        InvalidInputError: For any other shape.
    """
    if u_ds is None:
        return identity(6)
    matrix = as_operator(u_ds)
    if matrix.shape == (4, 4):
        return as_operator(linalg.block_diag(np.eye(2), matrix))
    if matrix.shape == (6, 6):
        return matrix
    raise InvalidInputError(
        f"Probe-system interaction must be 4x4 or 6x6, got {matrix.shape}",
        code=ErrorCode.DIMENSION_MISMATCH,
    )


def wigner_chain(
    u_s: npt.ArrayLike,
    u_ds: npt.ArrayLike | None = None,
    s0: npt.ArrayLike | None = None,
    basis: npt.ArrayLike | None = None,
) -> MeasurementChain:
    """Chain with F's two perceptions, at t1 and t2, on the same memory."""
    space = wigner_space()
    state0 = as_vector(s0) if s0 is not None else basis_vector(2, 0)
    partition = Observable.non_degenerate(
        basis if basis is not None else identity(2), ["s1", "s2"]
    )
    events: list[Event] = [
        UnitaryEvent(time=0.5, factors=(SYSTEM,), matrix=u_s),
        CoupleEvent.of(CouplingSpec(probe=PROBE, targets=(SYSTEM,), partition=partition, time=1.0)),
        RegisterEvent(time=1.5, memory=MEMORY, probe=PROBE),
        ObserveEvent(time=2.0, factors=(MEMORY,), observable=memory_observable(), name="t1"),
        UnitaryEvent(time=2.5, factors=(PROBE, SYSTEM), matrix=probe_system_unitary(u_ds)),
        ObserveEvent(time=3.0, factors=(MEMORY,), observable=memory_observable(), name="t2"),
    ]
    preparation = Observable.preparation([basis_vector(3, 0), basis_vector(3, 0), state0])
    return assemble_chain(
        space,
        InitialState.pure(product_state(space, {SYSTEM: state0})),
        events,
        preparation=preparation,
    )


def wigner_friend(
    u_s: npt.ArrayLike,
    u_ds: npt.ArrayLike | None = None,
    s0: npt.ArrayLike | None = None,
    basis: npt.ArrayLike | None = None,
) -> GedankenResult:
    """
    Joint distribution of F's answers at t1 and t2.

    P(yes, yes) = |<s1|U_S|s0>|², P(no, no) = |<s2|U_S|s0>|², cross terms 0,
    whatever the later probe-system interaction.
    """
    state0 = as_vector(s0) if s0 is not None else basis_vector(2, 0)
    columns = as_operator(basis) if basis is not None else identity(2)
    evolved = as_operator(u_s) @ state0
    p1 = abs(complex(np.vdot(columns[:, 0], evolved))) ** 2
    p2 = abs(complex(np.vdot(columns[:, 1], evolved))) ** 2
    closed = {("yes", "yes"): p1, ("yes", "no"): 0.0, ("no", "yes"): 0.0, ("no", "no"): p2}
    distribution = chain_distribution(wigner_chain(u_s, u_ds, state0, columns))
    return GedankenResult(
        name="wigner-friend",
        axes=("t1", "t2"),
        closed_form=closed,
        engine=distribution.marginal([1, 2]).by_labels(),
    )
