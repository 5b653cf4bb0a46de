"""Named built-in experiments runnable from the CLI."""

from __future__ import annotations

from collections.abc import Callable

from qchain.errors import ErrorCode, InvalidInputError
from qchain.gedanken import (
    GedankenResult,
    TwoObserverParams,
    hadamard_params,
    interference_experiment,
    random_two_observer_params,
    reduced_cross_check,
    scenario_a,
    scenario_b,
    scenario_c,
    wigner_friend,
)
from qchain.hilbert import hadamard, haar_random_unitary
from qchain.logging import get_logger, scenario_context
from qchain.models.distribution import LabelTuple
from qchain.scenario.runner import Report, RunSettings, report_from_results

logger = get_logger("scenario.builtins")

BuiltinRunner = Callable[[int | None], GedankenResult | list[GedankenResult]]


def _two_observer_params(seed: int | None) -> TwoObserverParams:
    return hadamard_params() if seed is None else random_two_observer_params(seed)


def _wigner(seed: int | None) -> GedankenResult:
    if seed is None:
        return wigner_friend(hadamard())
    return wigner_friend(haar_random_unitary(2, seed), haar_random_unitary(4, seed + 1))


def _interference(register_memory: bool) -> BuiltinRunner:
    def runner(seed: int | None) -> GedankenResult:
        u = hadamard() if seed is None else haar_random_unitary(2, seed)
        return interference_experiment(u, register_memory=register_memory)

    return runner


def _reduced(seed: int | None) -> list[GedankenResult]:
    if seed is None:
        params = TwoObserverParams(alpha=1.0, beta=0.0, u_f=hadamard())
    else:
        drawn = random_two_observer_params(seed)
        params = TwoObserverParams(
            alpha=1.0,
            beta=0.0,
            s0=drawn.s0,
            u_f=drawn.u_f,
            u_w=drawn.u_w,
            f_basis=drawn.f_basis,
            w_basis=drawn.w_basis,
        )
    return list(reduced_cross_check(params).values())


BUILTINS: dict[str, tuple[str, BuiltinRunner]] = {
    "scenario-a": (
        "F couples without registering; W's yes/no/not_sure",
        lambda seed: scenario_a(_two_observer_params(seed)),
    ),
    "scenario-b": (
        "F registers and perceives; joint (W, F) distribution",
        lambda seed: scenario_b(_two_observer_params(seed)),
    ),
    "scenario-c": (
        "F registers but never perceives; W's marginal",
        lambda seed: scenario_c(_two_observer_params(seed)),
    ),
    "wigner-friend": ("Friend's answers at t1 and t2 after a probe-system interaction", _wigner),
    "interference": ("Reversal without a which-path record", _interference(False)),
    "interference-record": ("Reversal after a which-path record", _interference(True)),
    "reduced": ("System-space path probabilities against scenarios A, B and C", _reduced),
}


def builtin_names() -> list[str]:
    return sorted(BUILTINS)


def run_builtin(
    name: str, seed: int | None = None, settings: RunSettings | None = None
) -> Report:
    """
    Run a built-in experiment and compare it with its closed form.

    Without a seed the Hadamard parameter set is used; a seed draws random
    unitaries, bases and amplitudes.

    Raises:
        InvalidInputError: unknown_builtin for an unrecognised name.
        NumericalInvariantError: If engine and closed form disagree.
    """
    if name not in BUILTINS:
        raise InvalidInputError(
            f"Unknown built-in {name!r}; choose from {builtin_names()}",
            code=ErrorCode.UNKNOWN_BUILTIN,
        )
    _, runner = BUILTINS[name]
    logger.info("Running built-in %s (seed %s)", name, seed)
    with scenario_context(name):
        outcome = runner(seed)

    if isinstance(outcome, GedankenResult):
        return report_from_results(
            name, outcome.axes, outcome.engine, outcome.closed_form, settings=settings
        )

    values: dict[LabelTuple, float] = {}
    closed: dict[LabelTuple, float] = {}
    for result in outcome:
        scenario = result.name.removeprefix("reduced-")
        for labels, p in result.engine.items():
            values[(scenario, *labels)] = p
        for labels, p in result.closed_form.items():
            closed[(scenario, *labels)] = p
    return report_from_results(
        name,
        ("scenario", *outcome[0].axes),
        values,
        closed,
        settings=settings,
        with_total=False,
    )
