"""Coupling reversal: does a probe that measured the system spoil the return to the start?

A probe D is entangled with the system, F witnesses that the coupling took
place (without learning its outcome), and the system-probe evolution is then
undone. W's readout asks whether (D, system) is back in |d_0 s_0>. W's own
probe and memory are left out: the final observable acts on (D, system)
directly, which gives the same odds.

Composite: F's memory (3), optionally a which-path memory for D (3), F's
probe (3), D (3), system (2).
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from qchain.apparatus import (
    CoupleEvent,
    CouplingSpec,
    Event,
    ObserveEvent,
    RegisterEvent,
    ReverseEvent,
    UnitaryEvent,
    assemble_chain,
    product_state,
)
from qchain.engines.feynman import chain_distribution
from qchain.gedanken.result import GedankenResult
from qchain.hilbert import as_operator, as_vector, basis_vector, complete_basis, identity
from qchain.models.chain import EigenClass, InitialState, MeasurementChain, Observable
from qchain.models.space import CompositeSpace

F_MEMORY, RECORD, F_PROBE, PROBE, SYSTEM = "mu_F", "mu_D", "d_F", "d", "s"


def interference_space(register_memory: bool) -> CompositeSpace:
    factors: list[tuple[str, int, str]] = [(F_MEMORY, 3, "memory")]
    if register_memory:
        factors.append((RECORD, 3, "memory"))
    factors += [(F_PROBE, 3, "probe"), (PROBE, 3, "probe"), (SYSTEM, 2, "system")]
    return CompositeSpace.of(*factors)


def coupling_witness() -> Observable:
    """F's partition of (D, system): coupling on = span{|d1 s1>, |d2 s2>}, off = the rest."""
    on = [2, 5]
    return Observable.computational(
        6, [("on", 1, on), ("off", 2, [n for n in range(6) if n not in on])]
    )


def return_observable(s0: npt.ArrayLike) -> Observable:
    """W's question on (D, system): back in |d_0 s_0> or elsewhere."""
    start = np.kron(basis_vector(3, 0), as_vector(s0))
    return Observable(
        basis=complete_basis(start),
        classes=(EigenClass(label="back", value=1.0), EigenClass(label="elsewhere", value=0.0)),
        assignment=(0,) + (1,) * 5,
    )


def interference_chain(
    u: npt.ArrayLike,
    *,
    register_memory: bool = False,
    s0: npt.ArrayLike | None = None,
) -> MeasurementChain:
    """
    Full-composite chain of the reversal experiment.

    Args:
        u: System evolution before D couples.
        register_memory: Record D's pointer in a separate memory before the reversal.
        s0: Initial system state, default |0>.
    """
    space = interference_space(register_memory)
    state0 = as_vector(s0) if s0 is not None else basis_vector(2, 0)
    unitary = as_operator(u)
    d_coupling = CouplingSpec(
        probe=PROBE,
        targets=(SYSTEM,),
        partition=Observable.non_degenerate(identity(2), ["s1", "s2"]),
        time=1.0,
    )
    events: list[Event] = [
        UnitaryEvent(time=0.5, factors=(SYSTEM,), matrix=unitary),
        CoupleEvent.of(d_coupling),
    ]
    if register_memory:
        events.append(RegisterEvent(time=1.5, memory=RECORD, probe=PROBE))
    events += [
        CoupleEvent.of(
            CouplingSpec(
                probe=F_PROBE, targets=(PROBE, SYSTEM), partition=coupling_witness(), time=2.0
            )
        ),
        RegisterEvent(time=2.5, memory=F_MEMORY, probe=F_PROBE),
        ObserveEvent(
            time=3.0,
            factors=(F_MEMORY,),
            observable=Observable.computational(
                3, [("blank", 0, [0]), ("on", 1, [1]), ("off", 2, [2])]
            ),
            name="F",
        ),
        ReverseEvent(time=4.0, coupling=d_coupling),
        UnitaryEvent(time=4.5, factors=(SYSTEM,), matrix=unitary.conj().T),
        ObserveEvent(
            time=5.0, factors=(PROBE, SYSTEM), observable=return_observable(state0), name="W"
        ),
    ]
    locals_ = [basis_vector(f.dim, 0) for f in space.factors[:-1]] + [state0]
    return assemble_chain(
        space,
        InitialState.pure(product_state(space, {SYSTEM: state0})),
        events,
        preparation=Observable.preparation(locals_),
    )


def interference_experiment(
    u: npt.ArrayLike,
    register_memory: bool = False,
    *,
    s0: npt.ArrayLike | None = None,
) -> GedankenResult:
    """
    Probability that (D, system) returns to |d_0 s_0>.

    Without a which-path record the branches recombine and P = 1; with one,
    P = |<s1|U|s0>|⁴ + |<s2|U|s0>|⁴.
    """
    state0 = as_vector(s0) if s0 is not None else basis_vector(2, 0)
    evolved = as_operator(u) @ state0
    weights = np.abs(evolved) ** 2
    back = float(np.sum(weights**2)) if register_memory else 1.0
    closed = {("back",): back, ("elsewhere",): 1.0 - back}
    distribution = chain_distribution(
        interference_chain(u, register_memory=register_memory, s0=state0)
    )
    return GedankenResult(
        name="interference-record" if register_memory else "interference",
        axes=("W",),
        closed_form=closed,
        engine=distribution.marginal([len(distribution.axes) - 1]).by_labels(),
    )


def which_path_difference(u: npt.ArrayLike, s0: npt.ArrayLike | None = None) -> float:
    """2|<s1|U|s0>|² |<s2|U|s0>|², the return probability lost to a which-path record."""
    state0 = as_vector(s0) if s0 is not None else basis_vector(2, 0)
    weights = np.abs(as_operator(u) @ state0) ** 2
    return float(2.0 * weights[0] * weights[1])
