"""Probability engines: path sums and operator evolution."""

from qchain.engines.evolution import (
    conditional_state,
    heisenberg_projector,
    partial_evolution,
    projector_product,
    trace_distribution,
    trace_probability,
)
from qchain.engines.feynman import (
    chain_distribution,
    coherent_final_probability,
    markov_probability,
    real_amplitude,
    transfer_matrices,
    virtual_amplitude,
)

__all__ = [
    "chain_distribution",
    "coherent_final_probability",
    "conditional_state",
    "heisenberg_projector",
    "markov_probability",
    "partial_evolution",
    "projector_product",
    "real_amplitude",
    "trace_distribution",
    "trace_probability",
    "transfer_matrices",
    "virtual_amplitude",
]
