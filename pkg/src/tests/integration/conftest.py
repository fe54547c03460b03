import json
from dataclasses import dataclass

import pytest
from typer.testing import CliRunner

from tichain import run as main_app
from tichain.core.polytope import format_inequalities
from tichain.core.tables import I_G, I_T


@dataclass
class CliResult:
    exit_code: int
    stdout: str

    def json(self) -> dict:
        return json.loads(self.stdout)

    @property
    def result(self):
        return self.json()["result"]


@pytest.fixture
def cli(mocker):
    """
    Invoke the root Typer app in-process.

    setup_logger is replaced so the runner's captured streams never become
    loguru sinks that outlive the invocation.
    """
    mocker.patch("tichain.run.setup_logger")
    runner = CliRunner()

    def invoke(*args: str) -> CliResult:
        outcome = runner.invoke(main_app.app, ["--reproducible", *args])
        if outcome.exception is not None and not isinstance(outcome.exception, SystemExit):
            raise outcome.exception
        return CliResult(exit_code=outcome.exit_code, stdout=outcome.stdout)

    return invoke


@pytest.fixture
def distribution_file(tmp_path):
    def write(payload: dict):
        path = tmp_path / "distribution.json"
        path.write_text(json.dumps(payload))
        return path

    return write


@pytest.fixture
def inequality_file(tmp_path):
    def write(*ineqs):
        path = tmp_path / "inequalities.txt"
        path.write_text(format_inequalities(ineqs or (I_T, I_G)))
        return path

    return write
