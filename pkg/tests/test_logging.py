"""Tests for logging setup and scenario tagging."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from pathlib import Path

import pytest

from qchain.config import LogsConfig
from qchain.constants import APP_NAME, LOG_COLORS, LOG_NO_SCENARIO, LOG_RESET
from qchain.logging import (
    LevelColorFormatter,
    ScenarioFilter,
    current_scenario,
    get_logger,
    scenario_context,
    setup_logging,
)


@pytest.fixture(autouse=True)
def restore_logging() -> Iterator[None]:
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    app_level = logging.getLogger(APP_NAME).level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)
    logging.getLogger(APP_NAME).setLevel(app_level)
    logging.captureWarnings(False)


def make_record(
    level: int = logging.WARNING, message: str = "norm drift"
) -> logging.LogRecord:
    return logging.LogRecord("qchain.test", level, __file__, 1, message, None, None)


class TestGetLogger:
    """Tests for get_logger."""

    @pytest.mark.parametrize(
        ("name", "expected"),
        [
            ("corpus", "qchain.corpus"),
            ("qchain.engines.feynman", "qchain.engines.feynman"),
            ("qchain", "qchain"),
            ("qchainx", "qchain.qchainx"),
        ],
    )
    def test_namespace(self, name: str, expected: str) -> None:
        assert get_logger(name).name == expected


class TestScenarioContext:
    """Records are tagged with the scenario being run."""

    def test_default(self) -> None:
        assert current_scenario() == LOG_NO_SCENARIO

    def test_nested_blocks_restore(self) -> None:
        with scenario_context("corpus"):
            with scenario_context("reversal.json"):
                assert current_scenario() == "reversal.json"
            assert current_scenario() == "corpus"
        assert current_scenario() == LOG_NO_SCENARIO

    def test_reset_after_exception(self) -> None:
        with pytest.raises(RuntimeError), scenario_context("bell-pair.json"):
            raise RuntimeError("boom")
        assert current_scenario() == LOG_NO_SCENARIO

    def test_filter_sets_attribute(self) -> None:
        record = make_record()
        with scenario_context("identity.json"):
            assert ScenarioFilter().filter(record)
        assert record.scenario == "identity.json"  # type: ignore[attr-defined]

    def test_filter_keeps_explicit_value(self) -> None:
        record = make_record()
        record.scenario = "given"  # type: ignore[attr-defined]
        with scenario_context("other"):
            ScenarioFilter().filter(record)
        assert record.scenario == "given"  # type: ignore[attr-defined]


class TestLevelColorFormatter:
    """Tests for LevelColorFormatter."""

    def test_plain(self) -> None:
        record = make_record()
        ScenarioFilter().filter(record)
        text = LevelColorFormatter(use_colors=False).format(record)
        assert f"| WARNING  | qchain.test | {LOG_NO_SCENARIO} | norm drift" in text
        assert "\033[" not in text

    def test_colored_level_only(self) -> None:
        record = make_record(logging.ERROR)
        ScenarioFilter().filter(record)
        text = LevelColorFormatter(use_colors=True).format(record)
        assert f"| {LOG_COLORS['ERROR']}ERROR   {LOG_RESET} |" in text
        assert text.endswith("norm drift")


class TestSetupLogging:
    """Tests for setup_logging."""

    def test_console_on_stderr(self, capsys: pytest.CaptureFixture[str]) -> None:
        setup_logging(level="info", use_colors=False)
        with scenario_context("hadamard-two-step.json"):
            get_logger("runner").info("Running")
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "| qchain.runner | hadamard-two-step.json | Running" in captured.err

    def test_levels(self) -> None:
        setup_logging(level="DEBUG")
        assert logging.getLogger(APP_NAME).level == logging.DEBUG
        setup_logging(level="bogus")
        assert logging.getLogger().level == logging.WARNING

    def test_replaces_handlers(self) -> None:
        setup_logging()
        setup_logging()
        assert len(logging.getLogger().handlers) == 1

    def test_file_handler(self, tmp_path: Path) -> None:
        log_file = tmp_path / "log" / "qchain.log"
        setup_logging(
            level="INFO",
            use_colors=True,
            logs_config=LogsConfig(save_to_file=True, file=log_file),
        )
        assert len(logging.getLogger().handlers) == 2
        with scenario_context("wigner-friend.json"):
            get_logger("corpus").warning("disagrees with its pinned values")
        text = log_file.read_text(encoding="utf-8")
        assert "| WARNING  | qchain.corpus | wigner-friend.json |" in text
        assert "\033[" not in text

    def test_file_handler_unavailable(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """A log path under a regular file disables file logging with a warning."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        setup_logging(
            use_colors=False,
            logs_config=LogsConfig(save_to_file=True, file=blocker / "qchain.log"),
        )
        assert len(logging.getLogger().handlers) == 1
        assert "File logging disabled" in capsys.readouterr().err
