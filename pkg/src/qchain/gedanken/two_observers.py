"""Two observers: F measures the system, W measures system and F's probe together.

Composite factors, in order: W's memory (6), F's memory (3), W's probe (6),
F's probe (3), system (2); 648 dimensions. W's partition of (F probe,
system) is the four φ states plus an idle class for the d^F_0 sector, so
W's pointer and memory need six states. Memory state 5 (idle) joins
memory state 0 in W's ``blank`` class.

Scenario A: F couples but never registers; W perceives.
Scenario B: F registers and perceives, then W perceives.
Scenario C: F registers without perceiving; W perceives.
"""

from __future__ import annotations

from typing import Literal

import numpy as np

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
from qchain.gedanken.params import TwoObserverParams, phi_vectors, system_amplitudes
from qchain.gedanken.result import GedankenResult
from qchain.hilbert import basis_vector
from qchain.logging import get_logger
from qchain.models.chain import InitialState, MeasurementChain, Observable
from qchain.models.space import CompositeSpace

logger = get_logger("gedanken.two_observers")

Scenario = Literal["a", "b", "c"]

W_MEMORY, F_MEMORY, W_PROBE, F_PROBE, SYSTEM = "mu_W", "mu_F", "d_W", "d_F", "s"
W_DIM = 6
F_DIM = 3

# Event times
T_U_F = 0.5
T_F_COUPLE = 1.0
T_F_REGISTER = 1.5
T_F_OBSERVE = 2.0
T_U_W = 2.5
T_W_COUPLE = 3.0
T_W_REGISTER = 3.5
T_W_OBSERVE = 4.0


def two_observer_space() -> CompositeSpace:
    return CompositeSpace.of(
        (W_MEMORY, W_DIM, "memory"),
        (F_MEMORY, F_DIM, "memory"),
        (W_PROBE, W_DIM, "probe"),
        (F_PROBE, F_DIM, "probe"),
        (SYSTEM, 2, "system"),
    )


def f_partition(params: TwoObserverParams) -> Observable:
    """F's partition of the system: s^F_1 -> yes, s^F_2 -> no."""
    return Observable.non_degenerate(params.f_basis, ["yes", "no"])


def w_partition(params: TwoObserverParams) -> Observable:
    """W's partition of (F probe, system): φ1..φ4 and the idle d^F_0 sector."""
    w1, w2 = params.w_states
    d0 = basis_vector(F_DIM, 0)
    phis = phi_vectors(params)
    classes = [(f"phi{j}", float(j), [phi]) for j, phi in enumerate(phis, start=1)]
    classes.append(("idle", 0.0, [np.kron(d0, w1), np.kron(d0, w2)]))
    return Observable.from_class_vectors(classes)


def f_memory_observable() -> Observable:
    return Observable.computational(F_DIM, [("blank", 0, [0]), ("yes", 1, [1]), ("no", 2, [2])])


def w_memory_observable(*, fine: bool = False) -> Observable:
    """
    W's perceived outcomes: yes, no and the rank-two not_sure class.

    With ``fine`` each φ class gets its own label instead.
    """
    if fine:
        return Observable.computational(
            W_DIM,
            [("blank", 0, [0, 5])] + [(f"phi{j}", j, [j]) for j in range(1, 5)],
        )
    return Observable.computational(
        W_DIM,
        [("blank", 0, [0, 5]), ("yes", 1, [1]), ("no", 2, [2]), ("not_sure", 3, [3, 4])],
    )


def two_observer_events(
    params: TwoObserverParams, scenario: Scenario, *, fine: bool = False
) -> list[Event]:
    """Event list of a scenario on the two-observer composite."""
    events: list[Event] = [
        UnitaryEvent(time=T_U_F, factors=(SYSTEM,), matrix=params.u_f),
        CoupleEvent.of(
            CouplingSpec(
                probe=F_PROBE, targets=(SYSTEM,), partition=f_partition(params), time=T_F_COUPLE
            )
        ),
    ]
    if scenario in ("b", "c"):
        events.append(RegisterEvent(time=T_F_REGISTER, memory=F_MEMORY, probe=F_PROBE))
    if scenario == "b":
        events.append(
            ObserveEvent(
                time=T_F_OBSERVE,
                factors=(F_MEMORY,),
                observable=f_memory_observable(),
                name="F",
            )
        )
    events += [
        UnitaryEvent(time=T_U_W, factors=(SYSTEM,), matrix=params.u_w),
        CoupleEvent.of(
            CouplingSpec(
                probe=W_PROBE,
                targets=(F_PROBE, SYSTEM),
                partition=w_partition(params),
                time=T_W_COUPLE,
            )
        ),
        RegisterEvent(time=T_W_REGISTER, memory=W_MEMORY, probe=W_PROBE),
        ObserveEvent(
            time=T_W_OBSERVE,
            factors=(W_MEMORY,),
            observable=w_memory_observable(fine=fine),
            name="W",
        ),
    ]
    return events


def two_observer_chain(
    params: TwoObserverParams, scenario: Scenario, *, fine: bool = False
) -> MeasurementChain:
    """Full-composite measurement chain of a scenario."""
    space = two_observer_space()
    state = product_state(space, {SYSTEM: params.s0})
    preparation = Observable.preparation(
        [basis_vector(f.dim, 0) for f in space.factors[:-1]] + [params.s0]
    )
    return assemble_chain(
        space,
        InitialState.pure(state),
        two_observer_events(params, scenario, fine=fine),
        preparation=preparation,
    )


def w_marginal(
    params: TwoObserverParams, scenario: Scenario, *, fine: bool = False
) -> dict[tuple[str, ...], float]:
    """W's outcome probabilities from the path-sum engine on the full composite."""
    distribution = chain_distribution(two_observer_chain(params, scenario, fine=fine))
    return distribution.marginal([len(distribution.axes) - 1]).by_labels()


def interference_term(params: TwoObserverParams) -> float:
    """2 Re[α* β A_1 A_4*], the part of P(yes^W) that an F record removes."""
    amps = system_amplitudes(params)
    return 2.0 * (params.alpha.conjugate() * params.beta * amps.a1 * amps.a4.conjugate()).real


def scenario_a(params: TwoObserverParams) -> GedankenResult:
    """F couples without registering; W sees interference between F's branches."""
    a1, a2, a3, a4 = system_amplitudes(params).as_tuple()
    alpha, beta = params.alpha, params.beta
    closed = {
        ("yes",): abs(alpha.conjugate() * a1 + beta.conjugate() * a4) ** 2,
        ("no",): abs(beta * a1 - alpha * a4) ** 2,
        ("not_sure",): abs(alpha.conjugate() * a2 + beta.conjugate() * a3) ** 2
        + abs(beta * a2 - alpha * a3) ** 2,
    }
    result = GedankenResult(
        name="scenario-a", axes=("W",), closed_form=closed, engine=w_marginal(params, "a")
    )
    logger.debug("scenario-a max difference %.3e", result.max_difference)
    return result


def scenario_b(params: TwoObserverParams) -> GedankenResult:
    """F registers and perceives; joint distribution over (W, F) outcomes."""
    a1, a2, a3, a4 = system_amplitudes(params).as_tuple()
    pa, pb = abs(params.alpha) ** 2, abs(params.beta) ** 2
    closed = {
        ("yes", "yes"): pa * abs(a1) ** 2,
        ("yes", "no"): pb * abs(a4) ** 2,
        ("no", "yes"): pb * abs(a1) ** 2,
        ("no", "no"): pa * abs(a4) ** 2,
        ("not_sure", "yes"): abs(a3) ** 2,
        ("not_sure", "no"): abs(a2) ** 2,
    }
    distribution = chain_distribution(two_observer_chain(params, "b"))
    engine = distribution.marginal([2, 1]).by_labels()
    result = GedankenResult(name="scenario-b", axes=("W", "F"), closed_form=closed, engine=engine)
    logger.debug("scenario-b max difference %.3e", result.max_difference)
    return result


def scenario_c(params: TwoObserverParams) -> GedankenResult:
    """F registers but never perceives; W's statistics equal scenario B's marginal."""
    a1, a2, a3, a4 = system_amplitudes(params).as_tuple()
    pa, pb = abs(params.alpha) ** 2, abs(params.beta) ** 2
    closed = {
        ("yes",): pa * abs(a1) ** 2 + pb * abs(a4) ** 2,
        ("no",): pb * abs(a1) ** 2 + pa * abs(a4) ** 2,
        ("not_sure",): abs(a2) ** 2 + abs(a3) ** 2,
    }
    result = GedankenResult(
        name="scenario-c", axes=("W",), closed_form=closed, engine=w_marginal(params, "c")
    )
    logger.debug("scenario-c max difference %.3e", result.max_difference)
    return result
