"""Tests for the built-in experiments."""

from __future__ import annotations

import pytest

from qchain.errors import ErrorCode, InvalidInputError
from qchain.scenario import BUILTINS, builtin_names, run_builtin


class TestBuiltins:
    """Every built-in agrees with its closed form."""

    @pytest.mark.parametrize("seed", [None, 3])
    @pytest.mark.parametrize("name", sorted(BUILTINS))
    def test_matches_closed_form(self, name: str, seed: int | None) -> None:
        report = run_builtin(name, seed)
        assert report.name == name
        assert report.reference == "closed_form"
        assert report.rows
        assert report.max_difference is not None
        assert report.max_difference < 1e-9

    def test_names(self) -> None:
        assert builtin_names() == [
            "interference",
            "interference-record",
            "reduced",
            "scenario-a",
            "scenario-b",
            "scenario-c",
            "wigner-friend",
        ]

    def test_scenario_a_hadamard(self) -> None:
        """Without a seed W answers yes with certainty."""
        report = run_builtin("scenario-a")
        values = {row.labels: row.probability for row in report.rows}
        assert values[("yes",)] == pytest.approx(1.0, abs=1e-10)
        assert report.total == pytest.approx(1.0, abs=1e-10)

    def test_reduced_pools_scenarios(self) -> None:
        """The reduced report keys rows by scenario and has no single total."""
        report = run_builtin("reduced")
        assert report.axes == ("scenario", "W")
        assert report.total is None
        assert {row.labels[0] for row in report.rows} == {"a", "b", "c"}

    @pytest.mark.parametrize("seed", [None, 4])
    def test_wigner_friend_rows(self, seed: int | None) -> None:
        """Only the four answer pairs are reported, never the blank pointer."""
        report = run_builtin("wigner-friend", seed)
        assert [row.labels for row in report.rows] == [
            ("no", "no"),
            ("no", "yes"),
            ("yes", "no"),
            ("yes", "yes"),
        ]
        assert report.total == pytest.approx(1.0, abs=1e-12)

    def test_unknown(self) -> None:
        with pytest.raises(InvalidInputError, match="Unknown built-in") as exc_info:
            run_builtin("scenario-z")
        assert exc_info.value.code is ErrorCode.UNKNOWN_BUILTIN
