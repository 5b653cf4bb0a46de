"""Probes, memories, couplings and event-driven chain assembly."""

from qchain.apparatus.couplings import (
    CouplingSpec,
    PointerCompletion,
    coupling_unitary,
    lift_observable,
    register_memory_unitary,
    reverse_coupling_unitary,
)
from qchain.apparatus.events import (
    CoupleEvent,
    Event,
    ObserveEvent,
    RegisterEvent,
    ReverseEvent,
    UnitaryEvent,
    assemble_chain,
    event_operator,
    order_events,
    product_state,
)
from qchain.apparatus.tagging import (
    perceive_distribution,
    probe_readout_chain,
    system_substates,
    tag_decomposition,
    tagged_final_state,
    tags_by_probe,
)

__all__ = [
    "CoupleEvent",
    "CouplingSpec",
    "Event",
    "ObserveEvent",
    "PointerCompletion",
    "RegisterEvent",
    "ReverseEvent",
    "UnitaryEvent",
    "assemble_chain",
    "coupling_unitary",
    "event_operator",
    "lift_observable",
    "order_events",
    "perceive_distribution",
    "probe_readout_chain",
    "product_state",
    "register_memory_unitary",
    "reverse_coupling_unitary",
    "system_substates",
    "tag_decomposition",
    "tagged_final_state",
    "tags_by_probe",
]
