import importlib.metadata
from pathlib import Path

import typer
from click import ClickException

from tichain.core.commands.bell import bell_app
from tichain.core.commands.marginal import marginal_app
from tichain.core.commands.quantum import quantum_app
from tichain.core.commands.witness import witness_app
from tichain.core.config import SCHEMA_VERSION
from tichain.core.errors import EXIT_USAGE, classify_error
from tichain.core.logger import logger, setup_logger
from tichain.core.metrics import flush_metrics, record_command_failure
from tichain.core.tables import TABLES_VERSION
from tichain.core.utils import CliState, load_run_config, reporting

app = typer.Typer(
    help="Certify entanglement and Bell nonlocality of infinite translation-invariant chains.",
    no_args_is_help=True,
)
app.add_typer(marginal_app, name="marginal")
app.add_typer(witness_app, name="witness")
app.add_typer(bell_app, name="bell")
app.add_typer(quantum_app, name="quantum")


def package_version() -> str:
    try:
        return importlib.metadata.version("tichain")
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


@app.callback()
def root(
    ctx: typer.Context,
    fmt: str | None = typer.Option(
        None, "--format", help="Output format: json, csv or table"
    ),
    output: Path | None = typer.Option(None, "--output", help="Write the report here"),
    reproducible: bool = typer.Option(
        False, "--reproducible", help="Omit the timestamp from JSON reports"
    ),
    config: Path | None = typer.Option(
        None, "--config", help="JSON file with command parameters"
    ),
) -> None:
    setup_logger()
    with reporting("config"):
        if fmt is not None and fmt not in ("json", "csv", "table"):
            raise ValueError(f"unknown format {fmt!r}")
        ctx.obj = CliState(
            format=fmt,
            output=output,
            reproducible=reproducible,
            config=load_run_config(config),
        )


@app.command("version")
def version() -> None:
    """
    Print package, output schema and builtin table versions.
    """
    typer.echo(
        f"tichain {package_version()} (schema {SCHEMA_VERSION}, tables {TABLES_VERSION})"
    )


def main():
    try:
        rv = app(standalone_mode=False)
        code = rv if isinstance(rv, int) else 0
    except ClickException as e:
        e.show()
        code = e.exit_code
    except typer.Abort:
        code = EXIT_USAGE
    except Exception as e:
        match = classify_error(e, command="tichain")
        record_command_failure("tichain", match.reason)
        logger.error(match.log_message)
        code = match.exit_code
    flush_metrics()
    raise SystemExit(code)


if __name__ == "__main__":
    main()
