"""Execute scenario documents with the selected engines and collect reports."""

from __future__ import annotations

from collections.abc import Mapping, Sequence

from pydantic import BaseModel, ConfigDict

from qchain.config import AppConfig, EngineName
from qchain.constants import (
    DEFAULT_TOLERANCE,
    DISTRIBUTION_TOLERANCE,
    EQUIVALENCE_TOLERANCE,
    UNITARITY_TOLERANCE,
)
from qchain.engines.evolution import trace_distribution
from qchain.engines.feynman import chain_distribution
from qchain.errors import ErrorCode, InvalidInputError, NumericalInvariantError
from qchain.histories import (
    cha_probabilities,
    consistency_check,
    family_chain,
    last_observer_distribution,
    marginal_check,
)
from qchain.logging import get_logger
from qchain.models.distribution import Distribution, LabelTuple
from qchain.scenario.builder import build_chain, build_family
from qchain.scenario.schema import ScenarioDocument

logger = get_logger("scenario.runner")

HISTORY_SEPARATOR = " -> "


class ReportRow(BaseModel):
    """One outcome-label tuple with its probability and optional reference value."""

    model_config = ConfigDict(frozen=True)

    labels: LabelTuple
    probability: float
    reference: float | None = None
    difference: float | None = None


class HistoriesSummary(BaseModel):
    """Consistency verdict and marginal relation of one projector family."""

    model_config = ConfigDict(frozen=True)

    family: str
    consistent: bool
    max_off_diagonal: float
    tolerance: float
    marginal_deviation: float
    total: float


class Report(BaseModel):
    """
    Result of one scenario run.

    ``reference`` names the column compared against the probabilities:
    ``evolution`` when both engines ran, ``closed_form`` for built-ins and
    ``feynman`` for history families.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    query: str
    engine: str
    axes: tuple[str, ...]
    reference: str | None = None
    rows: tuple[ReportRow, ...] = ()
    max_difference: float | None = None
    total: float | None = None
    histories: tuple[HistoriesSummary, ...] = ()


class RunSettings(BaseModel):
    """Engine choice and tolerances; document options and CLI flags override them."""

    model_config = ConfigDict(frozen=True)

    engine: EngineName = "feynman"
    tolerance: float = DEFAULT_TOLERANCE
    unitarity_tolerance: float = UNITARITY_TOLERANCE
    normalization_tolerance: float = DISTRIBUTION_TOLERANCE
    equivalence_tolerance: float = EQUIVALENCE_TOLERANCE
    prune_below: float | None = None

    @classmethod
    def from_config(cls, config: AppConfig) -> RunSettings:
        numerics = config.numerics
        return cls(
            engine=numerics.engine,
            tolerance=numerics.tolerance,
            unitarity_tolerance=numerics.unitarity_tolerance,
            normalization_tolerance=numerics.normalization_tolerance,
            equivalence_tolerance=numerics.equivalence_tolerance,
            prune_below=numerics.prune_below,
        )


def compare_rows(
    values: Mapping[LabelTuple, float], reference: Mapping[LabelTuple, float] | None = None
) -> tuple[tuple[ReportRow, ...], float | None]:
    """Rows sorted by label tuple and the largest |value − reference| (None without reference)."""
    keys = sorted(set(values) | set(reference or {}))
    rows: list[ReportRow] = []
    worst: float | None = None
    for key in keys:
        p = max(values.get(key, 0.0), 0.0)
        if reference is None:
            rows.append(ReportRow(labels=key, probability=p))
            continue
        ref = max(reference.get(key, 0.0), 0.0)
        difference = abs(p - ref)
        worst = difference if worst is None else max(worst, difference)
        rows.append(ReportRow(labels=key, probability=p, reference=ref, difference=difference))
    return tuple(rows), worst if reference is not None else None


def check_normalization(name: str, total: float, tol: float) -> None:
    """
    Raises:
        NumericalInvariantError: If |total − 1| exceeds tol.
    """
    if abs(total - 1.0) > tol:
        raise NumericalInvariantError(
            f"Probabilities of {name!r} sum to {total:.15g}, off by more than {tol:.1e}"
        )


def check_agreement(name: str, difference: float | None, tol: float, what: str) -> None:
    """
    Raises:
        NumericalInvariantError: If the largest difference exceeds tol.
    """
    if difference is not None and difference > tol:
        raise NumericalInvariantError(
            f"{what} differ by {difference:.3e} in {name!r}, tolerance {tol:.1e}"
        )


def _distribution(doc: ScenarioDocument, engine: str, settings: RunSettings) -> Distribution:
    built = build_chain(doc, settings.unitarity_tolerance)
    if engine == "evolution":
        full = trace_distribution(built.chain)
    else:
        full = chain_distribution(built.chain, prune_below=settings.prune_below)
    named = full.model_copy(update={"names": built.axis_names})
    return named.marginal(range(1, len(named.axes)))


def _query_values(
    doc: ScenarioDocument, distribution: Distribution
) -> tuple[tuple[str, ...], dict[LabelTuple, float]]:
    if doc.query.kind != "return_probability":
        return distribution.axis_names, distribution.by_labels()
    last = distribution.marginal([len(distribution.axes) - 1])
    label = doc.query.label if doc.query.label is not None else last.axes[0][0]
    return last.axis_names, {(label,): last.probability_of([label])}


def run(
    doc: ScenarioDocument,
    *,
    engine: EngineName | None = None,
    tol: float | None = None,
    settings: RunSettings | None = None,
) -> Report:
    """
    Run a document and report its distribution entries sorted by outcome labels.

    Engine and consistency tolerance come from the arguments, else the document
    options, else ``settings``. Matrices are checked for unitarity against
    ``settings.unitarity_tolerance`` only. With engine ``both`` every row
    carries the evolution value and the per-entry difference.

    Raises:
        InvalidInputError: missing_projector_families for a histories query
            without families.
        CapacityError: If the composite exceeds the dimension cap.
        NumericalInvariantError: If the total deviates from 1 or the engines disagree.
    """
    settings = settings or RunSettings()
    if doc.query.kind == "histories_check":
        return check_histories(doc, tol=tol, settings=settings)

    selected = engine or doc.options.engine or settings.engine
    logger.info("Running %r with engine %s", doc.name, selected)
    primary_engine = "evolution" if selected == "evolution" else "feynman"
    primary = _distribution(doc, primary_engine, settings)
    check_normalization(doc.name, primary.total(), settings.normalization_tolerance)

    axes, values = _query_values(doc, primary)
    reference_values: dict[LabelTuple, float] | None = None
    if selected == "both":
        secondary = _distribution(doc, "evolution", settings)
        check_normalization(doc.name, secondary.total(), settings.normalization_tolerance)
        _, reference_values = _query_values(doc, secondary)

    rows, worst = compare_rows(values, reference_values)
    check_agreement(doc.name, worst, settings.equivalence_tolerance, "Engines")
    return Report(
        name=doc.name,
        query=doc.query.kind,
        engine=selected,
        axes=axes,
        reference="evolution" if selected == "both" else None,
        rows=rows,
        max_difference=worst,
        total=primary.total(),
    )


def check_histories(
    doc: ScenarioDocument,
    *,
    tol: float | None = None,
    settings: RunSettings | None = None,
) -> Report:
    """
    Consistency verdicts and CHA probabilities of every projector family.

    Rows are keyed (family, history) with the history's labels joined in
    time order; the reference column is the path-sum probability of the
    family's equivalent chain.

    Raises:
        InvalidInputError: missing_projector_families if the document has none.
        NumericalInvariantError: If a Gram trace deviates from 1 or the
            diagonal disagrees with the path-sum engine.
    """
    if not doc.projector_families:
        raise InvalidInputError(
            f"Scenario {doc.name!r} has no projector_families to check",
            code=ErrorCode.MISSING_PROJECTOR_FAMILIES,
        )
    settings = settings or RunSettings()
    tolerance = tol or doc.options.tolerance or settings.tolerance

    values: dict[LabelTuple, float] = {}
    reference: dict[LabelTuple, float] = {}
    summaries: list[HistoriesSummary] = []
    for index, entry in enumerate(doc.projector_families):
        family = build_family(doc, index, settings.unitarity_tolerance)
        verdict = consistency_check(family, tolerance)
        cha = cha_probabilities(family)
        check_normalization(entry.name, cha.total(), settings.normalization_tolerance)
        chain = chain_distribution(family_chain(family))
        paths = chain.marginal(range(1, len(chain.axes))).by_labels()
        for labels, p in cha.by_labels().items():
            key = (entry.name, HISTORY_SEPARATOR.join(labels))
            values[key] = p
            reference[key] = paths.get(labels, 0.0)
        marginal = marginal_check(cha, last_observer_distribution(family))
        summaries.append(
            HistoriesSummary(
                family=entry.name,
                consistent=verdict.consistent,
                max_off_diagonal=verdict.max_off_diagonal,
                tolerance=tolerance,
                marginal_deviation=marginal.max_deviation,
                total=cha.total(),
            )
        )

    rows, worst = compare_rows(values, reference)
    check_agreement(doc.name, worst, settings.equivalence_tolerance, "Gram diagonal and path sums")
    return Report(
        name=doc.name,
        query="histories_check",
        engine="histories",
        axes=("family", "history"),
        reference="feynman",
        rows=rows,
        max_difference=worst,
        histories=tuple(summaries),
    )


def report_from_results(
    name: str,
    axes: Sequence[str],
    values: Mapping[LabelTuple, float],
    closed_form: Mapping[LabelTuple, float],
    *,
    query: str = "joint_distribution",
    settings: RunSettings | None = None,
    with_total: bool = True,
) -> Report:
    """
    Report of engine values checked against closed-form values.

    ``with_total`` is off when the rows pool several distributions. Outcomes
    missing from the closed form are reported only when the engine gives them
    weight above the equivalence tolerance.

    Raises:
        NumericalInvariantError: If they disagree beyond the equivalence tolerance.
    """
    settings = settings or RunSettings()
    weighted = {
        labels: p
        for labels, p in values.items()
        if labels in closed_form or p > settings.equivalence_tolerance
    }
    rows, worst = compare_rows(weighted, closed_form)
    check_agreement(name, worst, settings.equivalence_tolerance, "Closed form and engine")
    return Report(
        name=name,
        query=query,
        engine="feynman",
        axes=tuple(axes),
        reference="closed_form",
        rows=rows,
        max_difference=worst,
        total=sum(values.values()) if with_total else None,
    )
