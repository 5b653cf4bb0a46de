"""Path probabilities computed in the two-level system space alone.

With α = 1 and β = 0 W's four composite eigenstates are product states,
every path ends in its own orthogonal state, and the full-composite results
of all three two-observer scenarios collapse to |A_i|².
"""

from __future__ import annotations

import numpy as np

from qchain.constants import NORMALIZATION_TOLERANCE
from qchain.errors import ErrorCode, InvalidInputError
from qchain.gedanken.params import TwoObserverParams
from qchain.gedanken.result import GedankenResult
from qchain.gedanken.two_observers import Scenario, w_marginal

PathKey = tuple[int, int]

# W's composite eigenstate reached by each path (F outcome i, W outcome j)
PHI_OF_PATH: dict[PathKey, str] = {
    (1, 1): "phi1",
    (2, 2): "phi2",
    (2, 1): "phi3",
    (1, 2): "phi4",
}


def reduced_path_probabilities(params: TwoObserverParams) -> dict[PathKey, float]:
    """
    p(i, j) = |<s^W_j|U_W|s^F_i><s^F_i|U_F|s0>|² for F outcome i and W outcome j.

    Raises:
        InvalidInputError: Unless α = 1 and β = 0.
    """
    tol = NORMALIZATION_TOLERANCE
    if abs(params.alpha - 1.0) > tol or abs(params.beta) > tol:
        raise InvalidInputError(
            f"Reduced paths need alpha = 1 and beta = 0, got alpha={params.alpha}, "
            f"beta={params.beta}",
            code=ErrorCode.INVALID_PARAMETERS,
        )
    probabilities: dict[PathKey, float] = {}
    for i, f in enumerate(params.f_states, start=1):
        reached = abs(complex(np.vdot(f, params.u_f @ params.s0))) ** 2
        for j, w in enumerate(params.w_states, start=1):
            probabilities[(i, j)] = reached * abs(complex(np.vdot(w, params.u_w @ f))) ** 2
    return probabilities


def reduced_cross_check(params: TwoObserverParams) -> dict[Scenario, GedankenResult]:
    """Reduced path probabilities against W's fine-grained outcomes in each scenario."""
    paths = reduced_path_probabilities(params)
    closed = {(PHI_OF_PATH[key],): p for key, p in paths.items()}
    return {
        scenario: GedankenResult(
            name=f"reduced-{scenario}",
            axes=("W",),
            closed_form=closed,
            engine=w_marginal(params, scenario, fine=True),
        )
        for scenario in ("a", "b", "c")
    }
