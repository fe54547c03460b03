import csv
import io
import json
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import UTC, datetime
from pathlib import Path
from typing import Any, TypeVar

import typer
from tabulate import tabulate

from tichain.core.classes import Envelope, RunConfig
from tichain.core.config import env
from tichain.core.errors import EXIT_NEGATIVE, InputFormatError, classify_error
from tichain.core.logger import logger
from tichain.core.metrics import record_command_failure

T = TypeVar("T")
R = TypeVar("R")

OUTPUT_FORMATS = ("json", "csv", "table")


@dataclass
class CliState:
    """Options of the root command, shared with every sub-command through ``ctx.obj``."""

    format: str | None = None
    output: Path | None = None
    reproducible: bool = False
    config: RunConfig = field(default_factory=RunConfig)


def load_run_config(path: Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return RunConfig.model_validate_json(Path(path).read_text())


def state_of(ctx: typer.Context) -> CliState:
    return ctx.obj if isinstance(ctx.obj, CliState) else CliState()


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputFormatError(f"expected comma-separated integers, got {text!r}")


def fan_out(fn: Callable[[T], R], items: Sequence[T], threads: int | None = None) -> list[R]:
    """Apply ``fn`` to every item, keeping input order whatever the schedule."""
    workers = env.THREADS if threads is None else threads
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def timestamp() -> str:
    return datetime.now(UTC).isoformat(timespec="seconds")


def build_envelope(command: str, result: dict | list, reproducible: bool) -> dict:
    envelope = Envelope(
        command=command,
        generated_at=None if reproducible else timestamp(),
        result=result,
    )
    return envelope.model_dump(by_alias=True, exclude_none=True)


def _cell(value: Any) -> Any:
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value)
    return value


def _rows(result: dict | list) -> list[dict]:
    items = result if isinstance(result, list) else [result]
    return [{k: _cell(v) for k, v in item.items()} for item in items]


def render(command: str, result: dict | list, fmt: str, reproducible: bool) -> str:
    if fmt == "json":
        return json.dumps(build_envelope(command, result, reproducible), indent=2)
    rows = _rows(result)
    if fmt == "table":
        return tabulate(rows, headers="keys")
    if fmt == "csv":
        buffer = io.StringIO()
        fieldnames = list(dict.fromkeys(k for row in rows for k in row))
        writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue().rstrip("\n")
    raise InputFormatError(f"unknown output format {fmt!r}; use one of {OUTPUT_FORMATS}")


def emit(ctx: typer.Context, command: str, result: dict | list) -> None:
    state = state_of(ctx)
    fmt = state.format or state.config.format or "json"
    text = render(command, result, fmt, state.reproducible)
    output = state.output or (Path(state.config.output) if state.config.output else None)
    if output is None:
        typer.echo(text)
    else:
        output.write_text(text + "\n")
        logger.info(f"{command}: wrote {fmt} report to {output}")


@contextmanager
def reporting(command: str) -> Iterator[None]:
    """Turn library exceptions into a logged failure and the matching exit code."""
    try:
        yield
    except typer.Exit:
        raise
    except Exception as e:
        match = classify_error(e, command=command)
        record_command_failure(command, match.reason)
        logger.error(match.log_message)
        raise typer.Exit(code=match.exit_code)


def verdict(ok: bool) -> None:
    """Exit 1 after a negative verdict has been reported."""
    if not ok:
        raise typer.Exit(code=EXIT_NEGATIVE)


def first_set(*values: T | None, default: T) -> T:
    return next((v for v in values if v is not None), default)
