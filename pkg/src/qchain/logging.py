"""Logging setup: stderr console, optional rotating file, records tagged with the scenario."""

from __future__ import annotations

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import TYPE_CHECKING, ClassVar

from qchain.constants import (
    APP_NAME,
    LOG_COLORS,
    LOG_DATE_FORMAT,
    LOG_FORMAT,
    LOG_NO_SCENARIO,
    LOG_RESET,
)

if TYPE_CHECKING:
    from qchain.config import LogsConfig

_scenario: ContextVar[str] = ContextVar("qchain_scenario", default=LOG_NO_SCENARIO)


@contextmanager
def scenario_context(name: str) -> Iterator[None]:
    """Tag every record logged inside the block with ``name``."""
    token = _scenario.set(name)
    try:
        yield
    finally:
        _scenario.reset(token)


def current_scenario() -> str:
    return _scenario.get()


class ScenarioFilter(logging.Filter):
    """Adds the ``scenario`` attribute used by ``LOG_FORMAT``."""

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "scenario"):
            record.scenario = _scenario.get()  # type: ignore[attr-defined]
        return True


class LevelColorFormatter(logging.Formatter):
    """``LOG_FORMAT`` with the level name colored when the stream is a terminal."""

    COLORS: ClassVar[dict[str, str]] = LOG_COLORS

    def __init__(self, use_colors: bool = False) -> None:
        super().__init__(fmt=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
        self.use_colors = use_colors

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        color = self.COLORS.get(record.levelname)
        if not self.use_colors or color is None:
            return message
        padded = f"{record.levelname:<8}"
        return message.replace(f"| {padded} |", f"| {color}{padded}{LOG_RESET} |", 1)


def _file_handler(config: LogsConfig, level: int) -> RotatingFileHandler | None:
    """
    Rotating file handler for ``config.file``, or None if the file cannot be opened.

    Args:
        config: LogsConfig with file logging settings.
        level: Level for the handler.
    """
    log_path = Path(config.file)
    try:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handler = RotatingFileHandler(
            filename=log_path,
            maxBytes=config.max_size_mb * 1024 * 1024,
            backupCount=config.backup_count,
            encoding="utf-8",
        )
    except OSError as e:
        get_logger("logging").warning("File logging disabled, cannot open %s: %s", log_path, e)
        return None
    handler.setLevel(level)
    handler.setFormatter(LevelColorFormatter(use_colors=False))
    handler.addFilter(ScenarioFilter())
    return handler


def setup_logging(
    level: str = "WARNING",
    use_colors: bool | None = None,
    logs_config: LogsConfig | None = None,
) -> None:
    """
    Configure application logging.

    Console output goes to stderr; stdout is reserved for reports. Python
    warnings (numpy's RuntimeWarning among them) are routed into the same handlers.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        use_colors: Enable colored output. Auto-detected if None.
        logs_config: Optional LogsConfig for file logging configuration.
    """
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        numeric_level = logging.WARNING
    colors = sys.stderr.isatty() if use_colors is None else use_colors

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(LevelColorFormatter(use_colors=colors))
    console.addFilter(ScenarioFilter())

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.setLevel(numeric_level)
    root_logger.addHandler(console)

    if logs_config is not None and logs_config.save_to_file:
        handler = _file_handler(logs_config, numeric_level)
        if handler is not None:
            root_logger.addHandler(handler)

    logging.getLogger(APP_NAME).setLevel(numeric_level)
    logging.captureWarnings(True)


def get_logger(name: str) -> logging.Logger:
    """Get a logger under the ``qchain`` namespace."""
    if name != APP_NAME and not name.startswith(f"{APP_NAME}."):
        name = f"{APP_NAME}.{name}"
    return logging.getLogger(name)
