"""Command-line interface using Typer."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import TYPE_CHECKING, Annotated, NoReturn, cast

import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from qchain.constants import (
    APP_NAME,
    APP_VERSION,
    DEFAULT_CONFIG_FILE,
    ENGINES,
    ENV_PREFIX,
    OUTPUT_FORMATS,
)
from qchain.errors import EXIT_VALIDATION, ErrorCode, InvalidInputError, QchainError

if TYPE_CHECKING:
    from qchain.config import AppConfig, EngineName, OutputFormat

app = typer.Typer(
    name=APP_NAME,
    help="Sequential quantum measurement chains, observers and consistent histories",
    no_args_is_help=True,
)
config_app = typer.Typer(help="Configuration management commands")

app.add_typer(config_app, name="config")

console = Console()
err_console = Console(stderr=True)

# Common options
ConfigOption = Annotated[
    Path | None,
    typer.Option(
        "--config",
        "-c",
        help="Path to configuration file",
        envvar=f"{ENV_PREFIX}_CONFIG",
    ),
]

LogLevelOption = Annotated[
    str | None,
    typer.Option(
        "--log-level",
        "-l",
        help="Log level",
        envvar=f"{ENV_PREFIX}_LOG_LEVEL",
    ),
]

TolOption = Annotated[
    float | None,
    typer.Option("--tol", help="Validation and consistency tolerance"),
]

FormatOption = Annotated[
    str | None,
    typer.Option("--format", "-f", help=f"Output format ({', '.join(OUTPUT_FORMATS)})"),
]


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"{APP_NAME} {APP_VERSION}")
        raise typer.Exit()


@app.callback()
def main(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            "-v",
            help="Show version and exit",
            callback=version_callback,
            is_eager=True,
        ),
    ] = False,
) -> None:
    """qchain - sequential quantum measurement simulation."""
    pass


def _fail(error: QchainError) -> NoReturn:
    """Print a coded error on stderr and exit with its status."""
    code = escape(f"[{error.code.value}]")
    err_console.print(f"[red]Error {code}:[/red] {escape(str(error))}")
    raise typer.Exit(error.exit_status) from None


def _fail_message(message: str, code: ErrorCode = ErrorCode.INVALID_PARAMETERS) -> NoReturn:
    _fail(InvalidInputError(message, code=code))


def _load_config(config: Path | None, log_level: str | None) -> AppConfig:
    """Load settings, configure logging and apply the dimension cap."""
    from qchain.config import DIM_CAP_ENV, AppConfig
    from qchain.logging import setup_logging

    try:
        app_config = AppConfig.load(config)
    except FileNotFoundError:
        setup_logging(level=log_level or "WARNING")
        err_console.print(f"[red]Error:[/red] Configuration file not found: {config}")
        err_console.print(f"Run '[bold]{APP_NAME} config init[/bold]' to create one.")
        raise typer.Exit(EXIT_VALIDATION) from None
    except Exception as e:
        setup_logging(level=log_level or "WARNING")
        err_console.print(f"[red]Error loading configuration:[/red] {escape(str(e))}")
        raise typer.Exit(EXIT_VALIDATION) from None

    # CLI --log-level overrides config if provided
    effective_level = log_level if log_level else app_config.logs.level
    setup_logging(level=effective_level, logs_config=app_config.logs)
    os.environ.setdefault(DIM_CAP_ENV, str(app_config.numerics.dim_cap))
    return app_config


def _output_format(value: str | None, app_config: AppConfig) -> OutputFormat:
    if value is None:
        return app_config.output.format
    if value not in OUTPUT_FORMATS:
        _fail_message(f"Unknown format {value!r}; choose from {OUTPUT_FORMATS}")
    return cast("OutputFormat", value)


def _engine(value: str | None) -> EngineName | None:
    if value is not None and value not in ENGINES:
        _fail_message(f"Unknown engine {value!r}; choose from {ENGINES}")
    return cast("EngineName | None", value)


@app.command()
def run(
    file: Annotated[Path | None, typer.Argument(help="Scenario JSON file")] = None,
    engine: Annotated[
        str | None,
        typer.Option("--engine", "-e", help=f"Engine ({', '.join(ENGINES)})"),
    ] = None,
    output_format: FormatOption = None,
    tol: TolOption = None,
    builtin: Annotated[
        str | None, typer.Option("--builtin", "-b", help="Run a built-in experiment")
    ] = None,
    seed: Annotated[
        int | None, typer.Option("--seed", help="Random parameters for built-ins")
    ] = None,
    config: ConfigOption = None,
    log_level: LogLevelOption = None,
) -> None:
    """Run a scenario file or a built-in experiment and print its distribution."""
    from qchain.logging import scenario_context
    from qchain.scenario import RunSettings, emit, load_scenario, run_builtin
    from qchain.scenario import run as run_scenario

    app_config = _load_config(config, log_level)
    settings = RunSettings.from_config(app_config)
    fmt = _output_format(output_format, app_config)
    selected = _engine(engine)

    try:
        if builtin is not None:
            report = run_builtin(builtin, seed, settings)
        elif file is None:
            _fail_message("Give a scenario file or --builtin NAME")
        else:
            with scenario_context(file.name):
                doc = load_scenario(file, tol=settings.unitarity_tolerance)
                report = run_scenario(doc, engine=selected, tol=tol, settings=settings)
    except QchainError as e:
        _fail(e)

    typer.echo(emit(report, fmt, app_config.output.significant_digits), nl=False)


@app.command(name="check-histories")
def check_histories(
    file: Annotated[Path, typer.Argument(help="Scenario JSON file with projector_families")],
    tol: TolOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
    log_level: LogLevelOption = None,
) -> None:
    """Check the consistency of every projector family in a scenario."""
    from qchain.scenario import RunSettings, emit, load_scenario
    from qchain.scenario import check_histories as check

    app_config = _load_config(config, log_level)
    settings = RunSettings.from_config(app_config)
    fmt = _output_format(output_format, app_config)

    try:
        doc = load_scenario(file, tol=settings.unitarity_tolerance)
        report = check(doc, tol=tol, settings=settings)
    except QchainError as e:
        _fail(e)

    typer.echo(emit(report, fmt, app_config.output.significant_digits), nl=False)


@app.command()
def corpus(
    directory: Annotated[
        Path | None, typer.Argument(help="Corpus directory (bundled corpus by default)")
    ] = None,
    workers: Annotated[
        int, typer.Option("--workers", "-w", min=1, help="Documents run in parallel")
    ] = 1,
    tol: TolOption = None,
    config: ConfigOption = None,
    log_level: LogLevelOption = None,
) -> None:
    """Run every corpus document with both engines and check its pinned values."""
    from qchain.corpus import run_corpus
    from qchain.scenario import RunSettings

    app_config = _load_config(config, log_level)
    if directory is not None and not directory.is_dir():
        _fail_message(f"Corpus directory not found: {directory}")

    try:
        results = run_corpus(
            directory, workers=workers, tol=tol, settings=RunSettings.from_config(app_config)
        )
    except QchainError as e:
        _fail(e)

    digits = app_config.output.significant_digits
    table = Table(title="Corpus")
    table.add_column("file", style="cyan")
    table.add_column("name")
    table.add_column("status")
    table.add_column("rows", justify="right")
    table.add_column("checked", justify="right")
    table.add_column("max difference", justify="right")
    table.add_column("detail")
    for result in results:
        status = "[green]ok[/green]" if result.status == "ok" else "[red]failed[/red]"
        difference = "" if result.max_difference is None else f"{result.max_difference:.{digits}g}"
        detail = f"{result.code}: {result.message}" if result.code else ""
        table.add_row(
            result.file,
            result.name,
            status,
            str(result.rows),
            str(result.checked),
            difference,
            escape(detail),
        )
    console.print(table)

    failed = [r for r in results if r.status != "ok"]
    passed = len(results) - len(failed)
    console.print(f"\n[bold]Total:[/bold] {passed} passed, {len(failed)} failed")
    if failed:
        raise typer.Exit(max(r.exit_status for r in failed))


@app.command()
def schema() -> None:
    """Print the scenario JSON schema."""
    from qchain.scenario import ScenarioDocument

    typer.echo(json.dumps(ScenarioDocument.model_json_schema(), indent=2))


@app.command()
def builtins() -> None:
    """List the built-in experiments."""
    from qchain.scenario import BUILTINS

    table = Table(title="Built-in experiments")
    table.add_column("name", style="cyan")
    table.add_column("description")
    for name in sorted(BUILTINS):
        table.add_row(name, BUILTINS[name][0])
    console.print(table)


@app.command()
def version() -> None:
    """Show version information."""
    console.print(f"[bold]{APP_NAME}[/bold] version {APP_VERSION}")


# Config subcommands
@config_app.command(name="validate")
def config_validate(
    config: ConfigOption = None,
) -> None:
    """Validate configuration file and show the effective settings."""
    from qchain.config import AppConfig

    config_path = config or DEFAULT_CONFIG_FILE

    try:
        app_config = AppConfig.load(config_path)
        console.print(f"[green]Configuration is valid:[/green] {config_path}")

        numerics = app_config.numerics
        console.print("\n[bold]Summary:[/bold]")
        console.print(f"  Dimension cap:   {numerics.dim_cap}")
        console.print(f"  Tolerance:       {numerics.tolerance:g}")
        console.print(f"  Engine:          {numerics.engine}")
        console.print(f"  Output format:   {app_config.output.format}")
        console.print(f"  Digits:          {app_config.output.significant_digits}")
        console.print(f"  Log level:       {app_config.logs.level}")

    except FileNotFoundError:
        console.print(f"[red]Configuration file not found:[/red] {config_path}")
        raise typer.Exit(EXIT_VALIDATION) from None
    except Exception as e:
        console.print(f"[red]Configuration error:[/red] {escape(str(e))}")
        raise typer.Exit(EXIT_VALIDATION) from None


@config_app.command(name="init")
def config_init(
    config: ConfigOption = None,
    force: Annotated[
        bool,
        typer.Option("--force", help="Overwrite existing file"),
    ] = False,
) -> None:
    """Generate example configuration file."""
    from qchain.config import generate_example_config

    config_path = Path(config) if config else DEFAULT_CONFIG_FILE

    if config_path.exists() and not force:
        console.print(f"[yellow]Configuration file already exists:[/yellow] {config_path}")
        console.print("Use [bold]--force[/bold] to overwrite")
        raise typer.Exit(1)

    config_path.parent.mkdir(parents=True, exist_ok=True)

    with config_path.open("w") as f:
        f.write(generate_example_config())

    console.print(f"[green]Configuration file created:[/green] {config_path}")
