"""Worked two-observer, Wigner's friend, reversal and reduced-space experiments."""

from qchain.gedanken.interference import (
    interference_chain,
    interference_experiment,
    which_path_difference,
)
from qchain.gedanken.params import (
    SystemAmplitudes,
    TwoObserverParams,
    hadamard_params,
    phi_vectors,
    random_two_observer_params,
    system_amplitudes,
)
from qchain.gedanken.reduced import reduced_cross_check, reduced_path_probabilities
from qchain.gedanken.result import GedankenResult
from qchain.gedanken.two_observers import (
    interference_term,
    scenario_a,
    scenario_b,
    scenario_c,
    two_observer_chain,
    two_observer_events,
    two_observer_space,
)
from qchain.gedanken.wigner import wigner_chain, wigner_friend

__all__ = [
    "GedankenResult",
    "SystemAmplitudes",
    "TwoObserverParams",
    "hadamard_params",
    "interference_chain",
    "interference_experiment",
    "interference_term",
    "phi_vectors",
    "random_two_observer_params",
    "reduced_cross_check",
    "reduced_path_probabilities",
    "scenario_a",
    "scenario_b",
    "scenario_c",
    "system_amplitudes",
    "two_observer_chain",
    "two_observer_events",
    "two_observer_space",
    "which_path_difference",
    "wigner_chain",
    "wigner_friend",
]
